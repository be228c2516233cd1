//! Command-line front end. Every table is written as CSV (header row, LF line
//! endings) or JSON; floats are rounded to 15 significant digits and printed
//! in shortest round-trip form.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::constants::{c_ab, default_truncation, Route};
use crate::dioph::spacing_sweep;
use crate::error::Error;
use crate::lattice::{delta_with, MainTerm, Params};
use crate::meansq::ratio_scan;
use crate::voronoi::{g_table, voronoi_residual_with, voronoi_truncated_with, VoronoiConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage and input errors, 3 for guard and precision violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(e) if e.is_guard() => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairArg(pub Params);

impl FromStr for PairArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected a,b but got {s:?}"))?;
        let a: u32 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad exponent {a:?}"))?;
        let b: u32 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad exponent {b:?}"))?;
        Params::new(a, b).map(PairArg).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi but got {s:?}"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(format!("need 0 < lo <= hi, got {s:?}"));
        }
        Ok(RangeArg { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Direct,
    Euler,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "divisor2d",
    version,
    about = "Two-dimensional divisor problem: exact counts, Voronoi series, mean squares"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; defaults to csv for tables, json for `const` and `dioph`.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Points {
    /// A single abscissa.
    #[arg(long, conflicts_with = "x_range")]
    pub x: Option<f64>,
    /// Log-spaced abscissae lo:hi, endpoints included.
    #[arg(long)]
    pub x_range: Option<RangeArg>,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
}

impl Points {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        match (self.x, self.x_range) {
            (Some(x), _) => Ok(vec![x]),
            (None, Some(r)) => Ok(log_spaced(r.lo, r.hi, self.points)),
            (None, None) => Err(CliError::Usage(
                "one of --x or --x-range is required".into(),
            )),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact D(x), main term and Δ(x).
    Delta {
        #[arg(long)]
        pair: PairArg,
        #[command(flatten)]
        points: Points,
    },
    /// ∫₁ᵀ Δ² normalized by T^{(1+a+b)/(a+b)} against the predicted constant.
    Meansq {
        #[arg(long)]
        pair: PairArg,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// The mean-square constant c_{a,b} by either or both routes.
    Const {
        #[arg(long)]
        pair: PairArg,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
        /// Truncation: terms for the direct route, prime limit for the Euler route.
        #[arg(long = "N")]
        n: Option<u64>,
    },
    /// Δ(x) against the truncated Voronoi series Δ*(x, z).
    Voronoi {
        #[arg(long)]
        pair: PairArg,
        #[command(flatten)]
        points: Points,
        #[arg(long)]
        z: f64,
        /// Significant digits required of each cosine argument.
        #[arg(long, default_value_t = 15)]
        phase_precision: u32,
    },
    /// Solution counts against the spacing bound over the dyadic grid.
    Dioph {
        /// Pairs to sweep; all of (1,1), (1,2), (2,3) when omitted.
        #[arg(long)]
        pair: Vec<PairArg>,
    },
    /// Nonzero Voronoi coefficients g(n) for n ≤ N.
    Gtable {
        #[arg(long)]
        pair: PairArg,
        #[arg(long = "N")]
        n: u64,
    },
}

/// Interior points are rounded to 15 significant digits so the printed
/// abscissa is the one evaluated.
fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (l, h) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i == n - 1 => hi,
                    _ => {
                        let x = 10f64.powf(l + (h - l) * i as f64 / (n - 1) as f64);
                        format!("{x:.14e}").parse().unwrap()
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u128),
    Float(f64),
    Text(String),
}

/// Rounds to 15 significant digits, then prints the shortest string that
/// reads back to the rounded value.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let r: f64 = format!("{v:.14e}").parse().unwrap();
    let m = r.abs();
    if r == 0.0 || (1e-5..1e16).contains(&m) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Int(n) => n.to_string(),
                Cell::Float(v) => format_float(*v),
                Cell::Text(s) => s.clone(),
            }))
            .map_err(err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
    }

    fn object(&self, row: &[Cell]) -> String {
        let fields: Vec<String> = self
            .headers
            .iter()
            .zip(row)
            .map(|(h, c)| {
                let v = match c {
                    Cell::Int(n) => n.to_string(),
                    Cell::Float(v) if v.is_finite() => format_float(*v),
                    Cell::Float(_) => "null".into(),
                    Cell::Text(s) => serde_json::to_string(s).unwrap(),
                };
                format!("{}:{v}", serde_json::to_string(h).unwrap())
            })
            .collect();
        format!("{{{}}}", fields.join(","))
    }

    /// A JSON array of objects, or a single object when `single` and there is one row.
    pub fn to_json(&self, single: bool) -> Vec<u8> {
        let mut s = if single && self.rows.len() == 1 {
            self.object(&self.rows[0])
        } else {
            let objs: Vec<String> = self.rows.iter().map(|r| self.object(r)).collect();
            format!("[{}]", objs.join(",\n"))
        };
        s.push('\n');
        s.into_bytes()
    }
}

fn pair_cells(p: Params) -> [Cell; 2] {
    [Cell::Int(p.a() as u128), Cell::Int(p.b() as u128)]
}

/// Runs one parsed command and returns the table plus its default format.
pub fn execute(cmd: &Command) -> Result<(Table, Format, bool), CliError> {
    match cmd {
        Command::Delta { pair, points } => {
            let main = MainTerm::new(pair.0)?;
            let mut t = Table::new(&["x", "D", "main", "delta"]);
            for x in points.values()? {
                let s = delta_with(x, &main)?;
                t.rows.push(vec![
                    Cell::Float(x),
                    Cell::Int(s.summatory),
                    Cell::Float(s.main),
                    Cell::Float(s.delta),
                ]);
            }
            Ok((t, Format::Csv, false))
        }
        Command::Meansq { pair, t } => {
            let mut table = Table::new(&[
                "a",
                "b",
                "T",
                "integral",
                "ratio",
                "predicted",
                "relative_gap",
            ]);
            for r in ratio_scan(t, pair.0)? {
                let mut row = pair_cells(pair.0).to_vec();
                row.extend(
                    [r.t, r.integral, r.ratio, r.predicted, r.relative_gap].map(Cell::Float),
                );
                table.rows.push(row);
            }
            Ok((table, Format::Csv, false))
        }
        Command::Const { pair, route, n } => {
            let routes: &[Route] = match route {
                RouteArg::Direct => &[Route::Direct],
                RouteArg::Euler => &[Route::EulerProduct],
                RouteArg::Both => &[Route::Direct, Route::EulerProduct],
            };
            let mut t = Table::new(&["value", "error_bound", "route", "a", "b"]);
            for &r in routes {
                let e = c_ab(pair.0, r, n.unwrap_or_else(|| default_truncation(r)))?;
                let [a, b] = pair_cells(pair.0);
                t.rows.push(vec![
                    Cell::Float(e.value),
                    Cell::Float(e.truncation_error_bound),
                    Cell::Text(r.to_string()),
                    a,
                    b,
                ]);
            }
            Ok((t, Format::Json, true))
        }
        Command::Voronoi {
            pair,
            points,
            z,
            phase_precision,
        } => {
            let cfg = VoronoiConfig::with_precision(*z, *phase_precision)?;
            let table = g_table(cfg.terms(), pair.0)?;
            let main = MainTerm::new(pair.0)?;
            let mut t = Table::new(&["x", "z", "delta", "delta_star", "residual"]);
            for x in points.values()? {
                let exact = delta_with(x, &main)?.delta;
                let star = voronoi_truncated_with(x, cfg, &table)?;
                let resid = voronoi_residual_with(x, cfg, &table, &main)?;
                t.rows
                    .push([x, *z, exact, star, resid].map(Cell::Float).to_vec());
            }
            Ok((t, Format::Csv, false))
        }
        Command::Dioph { pair } => {
            let pairs: Vec<Params> = if pair.is_empty() {
                [(1, 1), (1, 2), (2, 3)]
                    .iter()
                    .map(|&(a, b)| Params::new(a, b).unwrap())
                    .collect()
            } else {
                pair.iter().map(|p| p.0).collect()
            };
            let mut t = Table::new(&[
                "a",
                "b",
                "h1",
                "h2",
                "r1",
                "r2",
                "delta",
                "count",
                "ambiguous",
                "bound",
                "ratio",
            ]);
            for p in pairs {
                for r in spacing_sweep(p)? {
                    let mut row = pair_cells(p).to_vec();
                    row.extend([r.h1, r.h2, r.r1, r.r2, r.delta].map(Cell::Float));
                    row.extend([Cell::Int(r.count as u128), Cell::Int(r.ambiguous as u128)]);
                    row.extend([Cell::Float(r.bound), Cell::Float(r.ratio)]);
                    t.rows.push(row);
                }
            }
            Ok((t, Format::Json, false))
        }
        Command::Gtable { pair, n } => {
            let table = g_table(*n, pair.0)?;
            let mut t = Table::new(&["n", "g"]);
            for (k, g) in table.nonzero() {
                t.rows.push(vec![Cell::Int(k as u128), Cell::Float(g)]);
            }
            Ok((t, Format::Csv, false))
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (table, default, single) = execute(&cli.command)?;
    let bytes = match cli.format.unwrap_or(default) {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json(single),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
