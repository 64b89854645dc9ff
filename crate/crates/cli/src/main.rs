//! hoflab command line: builds magnetic band structures, certifies Dirac
//! cones, predicts Landau levels, estimates the DOS under disorder, computes
//! quantized Hall conductivities and wave-packet transport.
//!
//! Outputs are CSV with one `#`-prefixed JSON metadata line, or standalone
//! JSON. Identical argv + seed produce byte-identical files regardless of
//! thread count.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hoflab_core::operator::{DisorderSpec, Distribution};
use hoflab_core::{dirac, dos, floquet, hall, lattice, semiclassics, transport};
use lattice::{Flux, LatticeKind};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

mod output;
mod selfcheck;

#[derive(Parser, Debug)]
#[command(name = "hoflab", version, about = "Spectral toolbox for magnetic lattice operators")]
struct Cli {
    /// flat key=value config file; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (default: hardware parallelism; env HOFLAB_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct FluxArgs {
    /// flux numerator p of h = 2πp/q
    #[arg(long, default_value_t = 1)]
    p: i64,
    /// flux denominator q of h = 2πp/q
    #[arg(long, default_value_t = 1)]
    q: i64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Hofstadter butterfly: band intervals for all reduced p/q, q ≤ qmax
    Butterfly {
        #[arg(long, default_value = "square")]
        lattice: String,
        #[arg(long, default_value_t = 40)]
        qmax: i64,
        #[arg(long, default_value = "butterfly.csv")]
        out: PathBuf,
    },
    /// Magnetic band structure on a k-grid at rational flux
    Bands {
        #[arg(long, default_value = "hex")]
        lattice: String,
        #[command(flatten)]
        flux: FluxArgs,
        /// k-grid resolution (floor: 12q)
        #[arg(long, default_value_t = 0)]
        grid: usize,
        #[arg(long, default_value = "bands.csv")]
        out: PathBuf,
    },
    /// Dirac-cone certification at rational flux
    Dirac {
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long, default_value = "dirac.json")]
        out: PathBuf,
    },
    /// Chambers polynomial f_{p,q} and its k-independence residual
    Chambers {
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Landau levels against measured torus bands
    Landau {
        #[arg(long, default_value = "hex")]
        lattice: String,
        /// flux denominator: h = 2π/hq
        #[arg(long, default_value_t = 101)]
        hq: i64,
        /// base rational p/q for the near-rational honeycomb case
        #[arg(long, default_value_t = 0)]
        base_p: i64,
        #[arg(long, default_value_t = 1)]
        base_q: i64,
        #[arg(long, default_value_t = 4)]
        nmax: i64,
        #[arg(long, default_value = "landau.csv")]
        out: PathBuf,
    },
    /// Disorder-averaged density of states (and optional trace check)
    Dos {
        #[arg(long, default_value = "hex")]
        lattice: String,
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long, default_value_t = 60)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        ensemble: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// uniform:a:b | bernoulli:w | twopoint:v1:v2:p | none
        #[arg(long, default_value = "none")]
        dist: String,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        bins: usize,
        #[arg(long, default_value = "dos.csv")]
        out: PathBuf,
        /// also run the semiclassical trace check with a bump at this center
        #[arg(long)]
        bump_center: Option<f64>,
        #[arg(long, default_value_t = 0.02)]
        bump_width: f64,
        #[arg(long, default_value = "trace_check.json")]
        trace_out: PathBuf,
    },
    /// Hall conductivity in a gap: Středa ladder + Chern cross-check
    Hall {
        #[arg(long, default_value = "hex")]
        lattice: String,
        /// gap index: square n ≥ 1, hex n ∈ ℤ (gap above z_n)
        #[arg(long, default_value_t = 0)]
        gap: i64,
        /// comma-separated rational fluxes, e.g. 1/48,1/46,1/44
        #[arg(long, default_value = "1/48,1/46,1/44,1/42,1/40")]
        fluxes: String,
        #[arg(long, default_value_t = 16)]
        chern_grid: usize,
        /// near-rational mode: base p/q and a ladder of denominators N
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value = "360,400,440")]
        ladder: String,
        #[arg(long, default_value = "hall.json")]
        out: PathBuf,
    },
    /// Wave-packet spreading: moments, Cesàro averages, β̂ exponents
    Transport {
        #[arg(long, default_value = "square")]
        lattice: String,
        #[command(flatten)]
        flux: FluxArgs,
        #[arg(long, default_value_t = 300)]
        l: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value = "none")]
        dist: String,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// energy filter: identity | bump:center:width
        #[arg(long, default_value = "identity")]
        filter: String,
        /// comma-separated Cesàro times
        #[arg(long, default_value = "0.75,1.5,3")]
        tladder: String,
        #[arg(long, default_value = "transport.csv")]
        out: PathBuf,
        #[arg(long, default_value = "transport.json")]
        json_out: PathBuf,
    },
    /// Run the invariant self-check suite
    Selfcheck,
}

fn parse_dist(s: &str) -> Result<Distribution> {
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts[0] {
        "none" => Distribution::None,
        "uniform" => Distribution::Uniform {
            a: parts.get(1).context("uniform:a:b")?.parse()?,
            b: parts.get(2).context("uniform:a:b")?.parse()?,
        },
        "bernoulli" => Distribution::Bernoulli { w: parts.get(1).context("bernoulli:w")?.parse()? },
        "twopoint" => Distribution::TwoPoint {
            v1: parts.get(1).context("twopoint:v1:v2:p")?.parse()?,
            v2: parts.get(2).context("twopoint:v1:v2:p")?.parse()?,
            p: parts.get(3).context("twopoint:v1:v2:p")?.parse()?,
        },
        other => anyhow::bail!("unknown distribution `{other}`"),
    })
}

fn parse_fluxes(s: &str) -> Result<Vec<(i64, i64)>> {
    s.split(',')
        .map(|t| {
            let (p, q) = t.trim().split_once('/').context("flux must be p/q")?;
            Ok((p.parse()?, q.parse()?))
        })
        .collect()
}

fn run(cli: Cli, meta: &output::Meta) -> Result<i32> {
    match cli.cmd {
        Cmd::Butterfly { lattice, qmax, out } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let recs = floquet::butterfly(kind, qmax)?;
            let mut body = String::new();
            writeln!(body, "p,q,flux,band_index,lo,hi")?;
            for r in &recs {
                for (i, b) in r.bands.iter().enumerate() {
                    writeln!(body, "{},{},{},{},{},{}", r.p, r.q, r.flux, i, b.0, b.1)?;
                }
            }
            output::write_csv(&out, meta, &body)?;
            println!("butterfly: {} fractions -> {}", recs.len(), out.display());
        }
        Cmd::Bands { lattice, flux, grid, out } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let n = if grid == 0 { 12 * flux.q as usize } else { grid };
            let bs = floquet::bands(kind, flux.p, flux.q, n)?;
            let mut body = String::new();
            write!(body, "k1,k2")?;
            for j in 1..=bs.num_branches {
                write!(body, ",F_{j}")?;
            }
            writeln!(body)?;
            for (ik, k) in bs.k_points.iter().enumerate() {
                write!(body, "{},{}", k.0, k.1)?;
                for j in 0..bs.num_branches {
                    write!(body, ",{}", bs.branches[ik * bs.num_branches + j])?;
                }
                writeln!(body)?;
            }
            output::write_csv(&out, meta, &body)?;
            println!("bands: {} branches on {}² -> {}", bs.num_branches, n, out.display());
        }
        Cmd::Dirac { flux, out } => {
            let rep = dirac::cone_slope(flux.p, flux.q)?;
            output::write_json(&out, meta, &rep)?;
            println!(
                "dirac p/q = {}/{}: residual {:.3e}, fit {:.6} (well {:.6}), v_F fit {:.6} (formula {:.6})",
                flux.p, flux.q, rep.residual, rep.slope_fit, rep.slope_formula_well,
                rep.fermi_velocity_fit, rep.slope_formula_fermivel
            );
            if rep.nonlinearity_warning {
                eprintln!("warning: ring nonlinearity {:.2}% — radii too large", rep.linearity_residual * 100.0);
            }
        }
        Cmd::Chambers { flux, out } => {
            let ch = floquet::chambers(flux.p, flux.q)?;
            println!(
                "f_{{{},{}}} coefficients (ascending): {:?}",
                flux.p, flux.q, ch.coeffs
            );
            println!("k-independence residual stddev: {:.3e}", ch.residual_std);
            println!("f(-3) = {}", ch.eval(-3.0));
            if let Some(path) = out {
                output::write_json(&path, meta, &ch)?;
            }
        }
        Cmd::Landau { lattice, hq, base_p, base_q, nmax, out } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let h = 2.0 * std::f64::consts::PI / hq as f64;
            let (table, spectrum) = match kind {
                LatticeKind::Square => (
                    semiclassics::landau_levels_square(h, nmax)?,
                    floquet::torus_spectrum_via_floquet(kind, 1, hq, 2 * hq as usize)?,
                ),
                LatticeKind::Hex => {
                    let table = semiclassics::landau_levels_hex(h, nmax, base_p, base_q)?;
                    let num = base_p * hq + base_q;
                    let den = base_q * hq;
                    let g = lattice::gcd(num, den);
                    let (pt, qt) = (num / g, den / g);
                    (table, floquet::torus_spectrum_via_floquet(kind, pt, qt, 2 * qt as usize)?)
                }
            };
            let mut body = String::new();
            writeln!(body, "n,z_pred,band_lo_meas,band_hi_meas,abs_err,gap_to_next")?;
            let levels = &table.levels;
            for (i, lv) in levels.iter().enumerate() {
                let meas = semiclassics::measured_band(&table, &spectrum, lv.n);
                let (lo, hi, err) = match meas {
                    Some((lo, hi)) => (lo, hi, (0.5 * (lo + hi) - lv.z).abs()),
                    None => (f64::NAN, f64::NAN, f64::NAN),
                };
                let gap = if i + 1 < levels.len() {
                    match (meas, semiclassics::measured_band(&table, &spectrum, levels[i + 1].n)) {
                        (Some((_, hi0)), Some((lo1, _))) => lo1 - hi0,
                        _ => f64::NAN,
                    }
                } else {
                    f64::NAN
                };
                writeln!(body, "{},{},{},{},{},{}", lv.n, lv.z, lo, hi, err, gap)?;
            }
            output::write_csv(&out, meta, &body)?;
            println!("landau: {} levels at h = 2π/{hq} -> {}", levels.len(), out.display());
        }
        Cmd::Dos {
            lattice,
            flux,
            l,
            ensemble,
            lambda,
            dist,
            seed,
            bins,
            out,
            bump_center,
            bump_width,
            trace_out,
        } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let f = Flux::rational(flux.p, flux.q)?;
            let disorder = DisorderSpec::new(parse_dist(&dist)?, lambda, seed)?;
            let curve = dos::dos_curve(kind, f, &disorder, l, ensemble, bins)?;
            let mut body = String::new();
            writeln!(body, "energy,density,stderr")?;
            for i in 0..curve.energies.len() {
                writeln!(body, "{},{},{}", curve.energies[i], curve.density[i], curve.stderr[i])?;
            }
            output::write_csv(&out, meta, &body)?;
            println!("dos: {} bins ({}) -> {}", bins, curve.method, out.display());
            if let Some(center) = bump_center {
                let h = f.value;
                let table = match kind {
                    LatticeKind::Square => semiclassics::landau_levels_square(h, 8)?,
                    LatticeKind::Hex => semiclassics::landau_levels_hex(h, 8, 0, 1)?,
                };
                let rep = dos::trace_formula_check(
                    kind,
                    f,
                    &disorder,
                    l,
                    ensemble,
                    &table,
                    center,
                    bump_width,
                    &dos::KpmParams::default(),
                )?;
                output::write_json(&trace_out, meta, &rep)?;
                println!(
                    "trace check: measured {:.6e} vs prediction {:.6e} (residual {:.2e})",
                    rep.measured, rep.prediction, rep.residual
                );
            }
        }
        Cmd::Hall { lattice, gap, fluxes, chern_grid, base, ladder, out } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let result = if let Some(base) = base {
                let (p, q) = base.split_once('/').context("--base must be p/q")?;
                let ns: Vec<i64> = ladder
                    .split(',')
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()?;
                hall::near_rational_hall(p.parse()?, q.parse()?, gap, &ns)?
            } else {
                let selector = match kind {
                    LatticeKind::Square => hall::GapSelector::SquareAbove(gap),
                    LatticeKind::Hex => hall::GapSelector::HexAbove(gap),
                };
                hall::hall_in_gap(selector, &parse_fluxes(&fluxes)?, chern_grid)?
            };
            println!(
                "hall {:?} gap {}: 2πc_H = {:.6} -> m = {} (chern {:?}, agree {:?})",
                kind, gap, result.two_pi_ch, result.m, result.chern_sum, result.agree
            );
            output::write_json(&out, meta, &result)?;
        }
        Cmd::Transport {
            lattice,
            flux,
            l,
            lambda,
            dist,
            seed,
            filter,
            tladder,
            out,
            json_out,
        } => {
            let kind = LatticeKind::from_str(&lattice)?;
            let filter = match filter.split(':').collect::<Vec<_>>().as_slice() {
                ["identity"] => transport::FilterSpec::Identity,
                ["bump", c, w] => {
                    transport::FilterSpec::Bump { center: c.parse()?, width: w.parse()? }
                }
                _ => anyhow::bail!("filter must be `identity` or `bump:center:width`"),
            };
            let spec = transport::TransportSpec {
                kind,
                flux: Flux::rational(flux.p, flux.q)?,
                disorder: DisorderSpec::new(parse_dist(&dist)?, lambda, seed)?,
                realization: 0,
                box_l: l,
                filter,
                t_ladder: tladder
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()?,
                quadrature: 32,
            };
            let run = transport::moments_and_cesaro(&spec)?;
            let mut body = String::new();
            writeln!(body, "t,M2,M4,norm,energy")?;
            for i in 0..run.times.len() {
                writeln!(
                    body,
                    "{},{},{},{},{}",
                    run.times[i], run.m2[i], run.m4[i], run.norms[i], run.energies[i]
                )?;
            }
            output::write_csv(&out, meta, &body)?;
            output::write_json(&json_out, meta, &run)?;
            for w in &run.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "transport: mass {:.6}, β̂(2) = {:.4}, β̂(4) = {:.4} -> {}",
                run.mass, run.beta2, run.beta4, out.display()
            );
        }
        Cmd::Selfcheck => {
            let failures = selfcheck::run_all();
            if failures > 0 {
                eprintln!("selfcheck: {failures} failure(s)");
                return Ok(2);
            }
            println!("selfcheck: all invariants hold");
        }
    }
    Ok(0)
}

fn main() {
    // merge a flat key=value config file into argv (explicit flags win)
    let mut argv: Vec<String> = std::env::args().collect();
    if let Some(pos) = argv.iter().position(|a| a == "--config") {
        if let Some(path) = argv.get(pos + 1).cloned() {
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    for line in text.lines() {
                        let line = line.trim();
                        if line.is_empty() || line.starts_with('#') {
                            continue;
                        }
                        if let Some((k, v)) = line.split_once('=') {
                            let flag = format!("--{}", k.trim());
                            if !argv.contains(&flag) {
                                argv.push(flag);
                                argv.push(v.trim().to_string());
                            }
                        }
                    }
                }
                Err(e) => {
                    eprintln!("error: cannot read config {path}: {e}");
                    std::process::exit(1);
                }
            }
        }
    }

    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // help/version print and exit 0; real parse errors exit 1
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };

    let threads = cli
        .threads
        .or_else(|| std::env::var("HOFLAB_THREADS").ok().and_then(|s| s.parse().ok()));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .unwrap_or_else(|e| eprintln!("warning: thread pool init: {e}"));
    }

    let meta = output::Meta::new(&argv[1..]);
    let code = match run(cli, &meta) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            match err.downcast_ref::<hoflab_core::Error>() {
                Some(e) if e.is_numerical() => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}
