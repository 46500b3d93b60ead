//! `spinrelax` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 for internal
//! failures (including an oracle mismatch).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use spinrelax_core::io::{format_value, load_system, system_to_json, ResultTable, SystemFile};
use spinrelax_core::oracle::{
    generate_model, naive_rate_three_phonon, naive_rate_two_phonon, ModelSpec,
};
use spinrelax_core::rates::{rate, rate_three_phonon, rate_two_phonon};
use spinrelax_core::sweeps::{
    channel_rates_vs_temperature, find_crossover, grid, sweep_cutoff, sweep_lambda,
    sweep_temperature, Crossover, SweepSeries,
};
use spinrelax_core::{
    assemble_generator, extract_t1, Error, Lineshape, LineshapeKind, Model, Order, Temperature,
};

#[derive(Debug, Parser)]
#[command(
    name = "spinrelax",
    version,
    about = "Spin-lattice relaxation rates and T1 from one-, two- and three-phonon processes"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-channel rates of one transition.
    Rates {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        orders: OrderArgs,
        #[command(flatten)]
        transition: TransitionArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Temperature, K.
        #[arg(long)]
        temp: f64,
    },
    /// T1 of the generator summed over the requested orders.
    T1 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        orders: OrderArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Temperature, K.
        #[arg(long)]
        temp: f64,
    },
    /// T1 per order over a temperature grid, as CSV.
    SweepTemp {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        orders: OrderArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Temperature grid in K, `start:stop:npoints[:log]`.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        /// Add per-channel rate columns for the transition --initial → --final.
        #[arg(long)]
        channels: bool,
        #[command(flatten)]
        transition: TransitionArgs,
    },
    /// T1 per order over a phonon cutoff grid, as CSV.
    SweepCutoff {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        orders: OrderArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Cutoff grid in cm⁻¹, `start:stop:npoints[:log]`.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        /// Temperature, K.
        #[arg(long)]
        temp: f64,
    },
    /// T1 per order over a coupling-scale grid, as CSV.
    SweepLambda {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        orders: OrderArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// λ grid, `start:stop:npoints[:log]`.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        /// Temperature, K.
        #[arg(long)]
        temp: f64,
    },
    /// Coupling scale at which two- and three-phonon relaxation rates are equal.
    Crossover {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Temperature, K.
        #[arg(long)]
        temp: f64,
        /// Search bracket for λ, `low:high`.
        #[arg(long, default_value = "0.001:1000", value_parser = parse_bracket)]
        bracket: (f64, f64),
    },
    /// Write a seeded synthetic model file in explicit form.
    GenModel {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Write the model_spec block instead of the expanded data.
        #[arg(long)]
        spec_only: bool,
    },
    /// Compare optimized two- and three-phonon rates with the naive oracles.
    OracleCheck {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Temperature, K.
        #[arg(long, default_value_t = 300.0)]
        temp: f64,
        /// Largest accepted relative deviation per channel.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Seed of the synthetic model.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of spin states.
    #[arg(long, default_value_t = 2)]
    states: usize,
    /// Number of phonon modes.
    #[arg(long, default_value_t = 30)]
    modes: usize,
    /// Lowest gap, cm⁻¹.
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
    /// Lowest mode frequency, cm⁻¹.
    #[arg(long, default_value_t = 20.0)]
    freq_min: f64,
    /// Highest mode frequency, cm⁻¹.
    #[arg(long, default_value_t = 200.0)]
    freq_max: f64,
    /// RMS coupling modulus, cm⁻¹.
    #[arg(long, default_value_t = 5.0)]
    coupling_scale: f64,
    /// Spacing of the upper states, cm⁻¹.
    #[arg(long, default_value_t = 500.0)]
    excited_offset: f64,
}

impl SpecArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec {
            seed: self.seed,
            n_states: self.states,
            n_modes: self.modes,
            gap: self.gap,
            freq_range: [self.freq_min, self.freq_max],
            coupling_scale: self.coupling_scale,
            excited_offset: self.excited_offset,
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Model file (JSON). Without it a synthetic model is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArgs,
}

impl ModelArgs {
    fn load(&self) -> Result<Model, Error> {
        match &self.input {
            Some(path) => load_system(path),
            None => generate_model(&self.spec.spec()),
        }
    }
}

#[derive(Debug, Args)]
struct ShapeArgs {
    /// Lineshape broadening σ, cm⁻¹.
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    /// Denominator regularizer η, cm⁻¹.
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Lineshape window in units of σ.
    #[arg(long, default_value_t = 6.0)]
    window: f64,
    /// gaussian or lorentzian.
    #[arg(long, default_value = "gaussian")]
    lineshape: LineshapeKind,
}

impl ShapeArgs {
    fn shape(&self) -> Result<Lineshape, Error> {
        Lineshape::new(self.lineshape, self.sigma, self.eta, self.window)
    }
}

#[derive(Debug, Args)]
struct OrderArgs {
    /// Perturbation orders in the coupling (2, 4, 6).
    #[arg(long, default_value = "2,4,6", value_parser = parse_orders)]
    orders: OrderList,
}

#[derive(Debug, Args)]
struct TransitionArgs {
    /// Initial state index.
    #[arg(long, default_value_t = 0)]
    initial: usize,
    /// Final state index.
    #[arg(long, default_value_t = 1)]
    r#final: usize,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
        match &self.output {
            Some(path) => fs::write(path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct OrderList(Vec<Order>);

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_orders(s: &str) -> Result<OrderList, String> {
    Order::parse_list(s)
        .map(OrderList)
        .map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let log = match parts.get(3) {
        None => false,
        Some(&"log") => true,
        Some(other) => {
            return Err(format!(
                "unknown grid spacing \"{other}\", expected \"log\""
            ))
        }
    };
    if !(3..=4).contains(&parts.len()) {
        return Err("grid must be start:stop:npoints[:log]".into());
    }
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| format!("bad number \"{t}\" in grid"))
    };
    let n = parts[2]
        .parse::<usize>()
        .map_err(|_| format!("bad point count \"{}\"", parts[2]))?;
    grid(num(parts[0])?, num(parts[1])?, n, log)
        .map(Grid)
        .map_err(|e| e.to_string())
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("bracket must be low:high")?;
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| format!("bad number \"{t}\" in bracket"))
    };
    Ok((num(lo)?, num(hi)?))
}

fn temperature(k: f64) -> Result<Temperature, Error> {
    Temperature::new(k)
}

fn csv(series: &SweepSeries) -> Result<String, Error> {
    ResultTable::from_series(series).to_csv_string()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Outcome of a command that ran to completion but found a problem.
enum Failure {
    Core(Error),
    OracleMismatch(f64),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Rates {
            model,
            shape,
            orders,
            transition,
            out,
            temp,
        } => {
            let m = model.load()?;
            let (shape, t) = (shape.shape()?, temperature(temp)?);
            let mut text = String::from("order,channel,rate_s-1\n");
            for order in orders.orders.0 {
                let r = rate(order, transition.r#final, transition.initial, &m, t, &shape)?;
                for (p, v) in &r.per_channel {
                    text.push_str(&format!("{order},{p},{}\n", format_value(*v)));
                }
                text.push_str(&format!("{order},total,{}\n", format_value(r.total)));
            }
            out.emit(&text, stdout)?;
        }
        Command::T1 {
            model,
            shape,
            orders,
            out,
            temp,
        } => {
            let m = model.load()?;
            let seconds = if m.bath.is_empty() {
                f64::INFINITY
            } else {
                let g =
                    assemble_generator(&m, temperature(temp)?, &shape.shape()?, &orders.orders.0)?;
                extract_t1(&g)?.seconds
            };
            out.emit(&format!("{}\n", format_value(seconds)), stdout)?;
        }
        Command::SweepTemp {
            model,
            shape,
            orders,
            out,
            grid,
            channels,
            transition,
        } => {
            let m = model.load()?;
            let shape = shape.shape()?;
            let mut series = sweep_temperature(&m, &grid.0, &orders.orders.0, &shape)?;
            if channels {
                let pair = (transition.r#final, transition.initial);
                series.channels =
                    channel_rates_vs_temperature(&m, &grid.0, &orders.orders.0, &shape, pair)?;
            }
            out.emit(&csv(&series)?, stdout)?;
        }
        Command::SweepCutoff {
            model,
            shape,
            orders,
            out,
            grid,
            temp,
        } => {
            let m = model.load()?;
            let (shape, t) = (shape.shape()?, temperature(temp)?);
            let mut merged: Option<SweepSeries> = None;
            for order in orders.orders.0 {
                let s = sweep_cutoff(&m, &grid.0, order, t, &shape)?;
                match &mut merged {
                    None => merged = Some(s),
                    Some(acc) => {
                        acc.t1.extend(s.t1);
                        acc.meta.orders.push(order);
                    }
                }
            }
            let series = merged.ok_or_else(|| Error::InvalidParameter("no orders given".into()))?;
            out.emit(&csv(&series)?, stdout)?;
        }
        Command::SweepLambda {
            model,
            shape,
            orders,
            out,
            grid,
            temp,
        } => {
            let m = model.load()?;
            let series = sweep_lambda(
                &m,
                &grid.0,
                &orders.orders.0,
                temperature(temp)?,
                &shape.shape()?,
            )?;
            out.emit(&csv(&series)?, stdout)?;
        }
        Command::Crossover {
            model,
            shape,
            out,
            temp,
            bracket,
        } => {
            let m = model.load()?;
            let text = match find_crossover(&m, temperature(temp)?, &shape.shape()?, bracket)? {
                Crossover::At {
                    lambda,
                    closed_form,
                } => {
                    format!(
                        "lambda* = {}\nclosed form = {}\n",
                        format_value(lambda),
                        format_value(closed_form)
                    )
                }
                Crossover::NoCrossover => {
                    format!("no crossover in [{}, {}]\n", bracket.0, bracket.1)
                }
            };
            out.emit(&text, stdout)?;
        }
        Command::GenModel {
            spec,
            out,
            spec_only,
        } => {
            let spec = spec.spec();
            let file = if spec_only {
                spec.validate()?;
                SystemFile::from_spec(spec)
            } else {
                SystemFile::from_model(&generate_model(&spec)?)
            };
            out.emit(&system_to_json(&file)?, stdout)?;
        }
        Command::OracleCheck {
            spec,
            shape,
            out,
            temp,
            tolerance,
        } => {
            let m = generate_model(&spec.spec())?;
            let (shape, t) = (shape.shape()?, temperature(temp)?);
            let (s, b, c) = (&m.system, &m.bath, &m.couplings);
            let mut worst = std::collections::BTreeMap::new();
            for a in 0..s.dim() {
                for f in (0..s.dim()).filter(|&f| f != a) {
                    let pairs = [
                        (
                            Order::Four,
                            rate_two_phonon(f, a, s, b, c, t, &shape)?,
                            naive_rate_two_phonon(f, a, s, b, c, t, &shape)?,
                        ),
                        (
                            Order::Six,
                            rate_three_phonon(f, a, s, b, c, t, &shape)?,
                            naive_rate_three_phonon(f, a, s, b, c, t, &shape)?,
                        ),
                    ];
                    for (order, fast, slow) in pairs {
                        for (p, v) in &fast.per_channel {
                            let d = rel(*v, slow.channel(*p));
                            let e = worst.entry((order, *p)).or_insert(0.0f64);
                            *e = e.max(d);
                        }
                    }
                }
            }
            let mut text = String::from("order,channel,max_rel_deviation\n");
            for ((order, p), d) in &worst {
                text.push_str(&format!("{order},{p},{d:.3e}\n"));
            }
            out.emit(&text, stdout)?;
            let max = worst.values().copied().fold(0.0, f64::max);
            if !(max <= tolerance) {
                return Err(Failure::OracleMismatch(max));
            }
        }
    }
    Ok(())
}

/// Parse `args` (including the program name) and run, writing results to
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buf = Vec::new();
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command, &mut buf)),
            Err(e) => Err(Failure::Core(Error::InvalidParameter(format!(
                "cannot start {n} threads: {e}"
            )))),
        },
        None => execute(cli.command, &mut buf),
    };
    if let Err(e) = stdout.write_all(&buf).and_then(|()| stdout.flush()) {
        let _ = writeln!(stderr, "error: {e}");
        return 2;
    }
    match outcome {
        Ok(()) => 0,
        Err(Failure::Core(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
        Err(Failure::OracleMismatch(d)) => {
            let _ = writeln!(stderr, "error: oracle deviation {d:.3e} exceeds tolerance");
            2
        }
    }
}

pub fn run_cli(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    run(args, &mut std::io::stdout(), &mut std::io::stderr())
}
