use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lossbell::bounds::{
    braunstein_mann_threshold, classify_region, holder_bound, holder_bound_exact, mabk_bound,
    mabk_bound_exact, svetlichny_requirement, tight_analytic_bound,
};
use lossbell::export::{
    envelope_json, fmt_f64, points_json, read_trials_csv, write_envelope_csv, write_json,
    write_points_csv, write_trials_csv, Metadata, ReportJson,
};
use lossbell::lhv::{
    enumerate_moment_points, envelope_for, scatter_sample, stochastic_probe, upper_envelope,
    EnumerationMode, EnvelopePolyline, ScatterPoint,
};
use lossbell::quantum::{
    optimal_settings, quantum_prediction, threshold_crossing_with_slope, CrossingTarget,
    SettingProfile, Settings,
};
use lossbell::sim::{estimate_functionals, simulate_design, violation_report};
use lossbell::{BellFunctional, EfficiencyProfile, FunctionalKind, Rational, SiteCount};

use crate::{
    BoundsArgs, Cli, Command, ConfigError, EnvelopeArgs, FigureArgs, FunctionalArgs, SimulateArgs,
    ThresholdArgs,
};

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Envelope(a) => envelope(&cli.out_dir, a),
        Command::Figure(a) => figure(&cli.out_dir, a),
        Command::Threshold(a) => threshold(&cli.out_dir, a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(&cli.out_dir, a),
    }
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn parse_signs(s: &str) -> Result<(i8, i8)> {
    let sign = |c| match c {
        '+' => Ok(1),
        '-' => Ok(-1),
        _ => Err(config_err(format!(
            "signs must be two of '+'/'-', got '{s}'"
        ))),
    };
    let cs: Vec<char> = s.chars().collect();
    match cs.as_slice() {
        [a, b] => Ok((sign(*a)?, sign(*b)?)),
        _ => Err(config_err(format!(
            "signs must be two of '+'/'-', got '{s}'"
        ))),
    }
}

fn parse_kind(s: &str, n: SiteCount) -> Result<FunctionalKind> {
    if s.eq_ignore_ascii_case("natural") {
        Ok(BellFunctional::natural(n).kind)
    } else {
        Ok(s.parse()?)
    }
}

fn parse_functional(a: &FunctionalArgs, n: SiteCount) -> Result<BellFunctional> {
    let (sr, si) = parse_signs(&a.signs)?;
    let f = BellFunctional::new(parse_kind(&a.functional, n)?, sr, si)?;
    if let Some(adv) = f.check_sites(n)? {
        eprintln!("note: {f} at n = {n} ({adv:?}); its MABK bound is not an LHV bound here");
    }
    Ok(f)
}

/// Exact rational from `num/den` or a plain decimal such as `0.25`.
fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || config_err(format!("'{s}' is not a decimal or num/den"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num.trim().parse().map_err(|_| bad())?;
        let den: i128 = den.trim().parse().map_err(|_| bad())?;
        if den <= 0 {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 30
    {
        return Err(bad());
    }
    let digits: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let r = Rational::new(digits, 10i128.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

fn finish(path: PathBuf, mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn config(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn write_scatter(dir: &Path, name: &str, meta: &Metadata, pts: &[ScatterPoint]) -> Result<()> {
    let (path, mut out) = create(dir, name)?;
    meta.write_comment_block(&mut out)?;
    writeln!(out, "w_num,w_den,f_num,f_den,w,f,components")?;
    for p in pts {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.w.numer(),
            p.w.denom(),
            p.f.numer(),
            p.f.denom(),
            fmt_f64(p.w_f64()),
            fmt_f64(p.f_f64()),
            p.components
        )?;
    }
    finish(path, out)
}

fn envelope(dir: &Path, a: &EnvelopeArgs) -> Result<()> {
    let n = SiteCount::new(a.n)?;
    let f = parse_functional(&a.functional, n)?;
    let mode: EnumerationMode = a.mode.parse()?;
    let json = match a.format.as_str() {
        "csv" => false,
        "json" => true,
        other => {
            return Err(config_err(format!(
                "format must be csv or json, got '{other}'"
            )))
        }
    };
    let query = a.query.as_deref().map(parse_rational).transpose()?;
    if a.scatter == 0 {
        return Err(config_err("--scatter must be at least 1"));
    }

    let set = enumerate_moment_points(n, mode)?;
    let env = upper_envelope(&set, &f)?;
    let meta = Metadata::new(
        "envelope",
        config(&[
            ("n", n.to_string()),
            ("functional", f.label()),
            ("mode", a.mode.to_ascii_lowercase()),
            ("scatter", a.scatter.to_string()),
            ("format", a.format.clone()),
            ("query", a.query.clone().unwrap_or_else(|| "none".into())),
            ("probe", a.probe.map_or("none".into(), |p| p.to_string())),
        ]),
        Some(a.seed),
    );

    let ext = if json { "json" } else { "csv" };
    let (path, mut out) = create(dir, &format!("envelope_n{n}_{}.{ext}", f.label()))?;
    if json {
        write_json(&envelope_json(&env, &meta), &mut out)?;
    } else {
        write_envelope_csv(&env, &meta, &mut out)?;
    }
    finish(path, out)?;

    let (path, mut out) = create(dir, &format!("points_n{n}.{ext}"))?;
    if json {
        write_json(&points_json(&set, &meta), &mut out)?;
    } else {
        write_points_csv(&set, &meta, &mut out)?;
    }
    finish(path, out)?;

    let pts = scatter_sample(&set, &f, a.scatter, a.seed)?;
    write_scatter(dir, &format!("scatter_n{n}_{}.csv", f.label()), &meta, &pts)?;

    if let Some(trials) = a.probe {
        let r = stochastic_probe(&env, trials, a.seed)?;
        println!(
            "probe: max excess {} over {} trials (worst at W = {}, F = {})",
            r.max_excess, r.trials, r.worst_w, r.worst_f
        );
    }
    match query {
        Some(w) => println!("{}", env.query(w)?),
        None => {
            println!("envelope n = {n}, {f}: {} vertices", env.vertices().len());
            for v in env.vertices() {
                println!("  W = {:<8} F = {}", v.w.to_string(), v.f);
            }
        }
    }
    Ok(())
}

fn figure_spec(which: u32) -> Result<(SiteCount, BellFunctional)> {
    let (n, f) = match which {
        1 => (2, BellFunctional::chsh()),
        2 => (3, BellFunctional::mermin()),
        3 => (4, BellFunctional::ardehali()),
        4 => (6, BellFunctional::ardehali()),
        k => return Err(config_err(format!("unknown figure {k}; expected 1..4"))),
    };
    Ok((SiteCount::new(n)?, f))
}

fn grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(config_err(format!("--step must lie in (0, 1], got {step}")));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=count).map(|i| (i as f64 * step).min(1.0)).collect();
    if g.last().is_some_and(|&x| x < 1.0 - 1e-12) {
        g.push(1.0);
    }
    Ok(g)
}

struct FigureRow {
    holder: f64,
    mabk: f64,
    envelope: f64,
    quantum: f64,
    region: &'static str,
}

fn figure_row(
    n: SiteCount,
    f: &BellFunctional,
    env: &EnvelopePolyline,
    c: f64,
    w: f64,
) -> Result<FigureRow> {
    Ok(FigureRow {
        holder: holder_bound(n, f, w)?,
        mabk: mabk_bound(n, f),
        envelope: env.query_f64(w)?,
        quantum: c * w,
        region: classify_region(n, w)?.name(),
    })
}

fn figure(dir: &Path, a: &FigureArgs) -> Result<()> {
    let (n, f) = figure_spec(a.which)?;
    let ws = grid(a.step)?;
    if a.scatter == 0 {
        return Err(config_err("--scatter must be at least 1"));
    }
    let set = enumerate_moment_points(n, EnumerationMode::Dp)?;
    let env = upper_envelope(&set, &f)?;
    let c = optimal_settings(n, &f)?.value;
    let meta = Metadata::new(
        "figure",
        config(&[
            ("which", a.which.to_string()),
            ("n", n.to_string()),
            ("functional", f.label()),
            ("step", a.step.to_string()),
            ("scatter", a.scatter.to_string()),
        ]),
        Some(a.seed),
    );

    let (path, mut out) = create(dir, &format!("figure{}.csv", a.which))?;
    meta.write_comment_block(&mut out)?;
    writeln!(out, "w,holder_bound,mabk_bound,envelope,quantum_ghz,region")?;
    for &w in &ws {
        let r = figure_row(n, &f, &env, c, w)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(w),
            fmt_f64(r.holder),
            fmt_f64(r.mabk),
            fmt_f64(r.envelope),
            fmt_f64(r.quantum),
            r.region
        )?;
    }
    finish(path, out)?;

    if a.which >= 2 {
        let (path, mut out) = create(dir, &format!("figure{}_eta.csv", a.which))?;
        meta.write_comment_block(&mut out)?;
        writeln!(
            out,
            "eta,w,holder_bound,mabk_bound,envelope,quantum_ghz,region"
        )?;
        for &eta in &ws {
            let w = eta.powi(n.get() as i32);
            let r = figure_row(n, &f, &env, c, w)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(eta),
                fmt_f64(w),
                fmt_f64(r.holder),
                fmt_f64(r.mabk),
                fmt_f64(r.envelope),
                fmt_f64(r.quantum),
                r.region
            )?;
        }
        finish(path, out)?;
    }

    let pts = scatter_sample(&set, &f, a.scatter, a.seed)?;
    write_scatter(dir, &format!("figure{}_scatter.csv", a.which), &meta, &pts)
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let bad = || config_err(format!("'{s}' is not a site count or range a..b"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

struct ThresholdRow {
    n: SiteCount,
    functional: BellFunctional,
    w_analytic: Option<f64>,
    eta_analytic: Option<f64>,
    eta_bm: f64,
    w_svetlichny: f64,
    eta_svetlichny: f64,
    w_envelope: Option<f64>,
    eta_envelope: Option<f64>,
}

fn threshold(dir: &Path, a: &ThresholdArgs) -> Result<()> {
    let (lo, hi) = parse_range(&a.n)?;
    let mut rows = Vec::new();
    for k in lo..=hi {
        let n = SiteCount::new(k)?;
        let f = BellFunctional::of_kind(parse_kind(&a.functional, n)?);
        let slope = optimal_settings(n, &f)?.value;
        let analytic = threshold_crossing_with_slope(n, &f, CrossingTarget::Analytic, slope)?;
        let env = envelope_for(n, &f)?;
        let exact = threshold_crossing_with_slope(n, &f, CrossingTarget::Envelope(&env), slope)?;
        let sv = svetlichny_requirement(n);
        rows.push(ThresholdRow {
            n,
            functional: f,
            w_analytic: analytic.w_star,
            eta_analytic: analytic.eta_symmetric,
            eta_bm: braunstein_mann_threshold(n),
            w_svetlichny: sv.w_threshold,
            eta_svetlichny: sv.eta_symmetric,
            w_envelope: exact.w_star,
            eta_envelope: exact.eta_symmetric,
        });
    }

    let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.6}"));
    println!(
        "{:>3}  {:<12} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n",
        "functional",
        "w_analytic",
        "eta_anal",
        "eta_BM",
        "w_svet",
        "eta_svet",
        "w_envelope",
        "eta_env"
    );
    for r in &rows {
        println!(
            "{:>3}  {:<12} {:>10} {:>10} {:>10.6} {:>10.6} {:>10.6} {:>10} {:>10}",
            r.n.get(),
            r.functional.label(),
            opt(r.w_analytic),
            opt(r.eta_analytic),
            r.eta_bm,
            r.w_svetlichny,
            r.eta_svetlichny,
            opt(r.w_envelope),
            opt(r.eta_envelope)
        );
    }

    if a.csv {
        let meta = Metadata::new(
            "threshold",
            config(&[("n", a.n.clone()), ("functional", a.functional.clone())]),
            None,
        );
        let (path, mut out) = create(dir, "threshold.csv")?;
        meta.write_comment_block(&mut out)?;
        writeln!(
            out,
            "n,functional,w_analytic,eta_analytic,eta_braunstein_mann,w_svetlichny,eta_svetlichny,w_envelope,eta_envelope"
        )?;
        let opt = |x: Option<f64>| x.map_or(String::new(), fmt_f64);
        for r in &rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n.get(),
                r.functional.label(),
                opt(r.w_analytic),
                opt(r.eta_analytic),
                fmt_f64(r.eta_bm),
                fmt_f64(r.w_svetlichny),
                fmt_f64(r.eta_svetlichny),
                opt(r.w_envelope),
                opt(r.eta_envelope)
            )?;
        }
        finish(path, out)?;
    }
    Ok(())
}

fn bounds(a: &BoundsArgs) -> Result<()> {
    let n = SiteCount::new(a.n)?;
    let f = parse_functional(&a.functional, n)?;
    let w = parse_rational(&a.w)?;
    if w < Rational::from_integer(0) || w > Rational::from_integer(1) {
        return Err(lossbell::Error::Domain(format!("w = {w} outside [0, 1]")).into());
    }
    let wf = to_f64(w);
    let env = envelope_for(n, &f)?;
    let fenv = env.query(w)?;
    println!("n = {n}");
    println!("functional = {f}");
    println!("w = {w}");
    match holder_bound_exact(n, &f, w)? {
        Some(h) => println!("holder_bound = {} ({h})", holder_bound(n, &f, wf)?),
        None => println!("holder_bound = {}", holder_bound(n, &f, wf)?),
    }
    let m = mabk_bound_exact(n, &f);
    println!("mabk_bound = {} ({m})", m.to_f64());
    println!(
        "tight_analytic_bound = {}",
        tight_analytic_bound(n, &f, wf)?
    );
    println!("envelope = {} ({fenv})", to_f64(fenv));
    println!("region = {}", classify_region(n, wf)?.name());
    Ok(())
}

fn simulate(dir: &Path, a: &SimulateArgs) -> Result<()> {
    let (trials, etas, settings) = match &a.input {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let t = read_trials_csv(BufReader::new(file))?;
            if a.n.is_some_and(|k| k != t.sites().get()) {
                return Err(config_err(format!(
                    "--n disagrees with the {}-site trials file",
                    t.sites()
                )));
            }
            (t, None, None)
        }
        None => {
            let n = SiteCount::new(
                a.n.ok_or_else(|| config_err("--n is required unless --input is given"))?,
            )?;
            let f = parse_functional(&a.functional, n)?;
            let etas = match (&a.eta, &a.etas) {
                (Some(e), None) => EfficiencyProfile::symmetric(n, *e)?,
                (None, Some(v)) => EfficiencyProfile::new(v.clone())?,
                _ => return Err(config_err("give --eta or --etas")),
            };
            let settings = match (&a.angles_a, &a.angles_b) {
                (Some(x), Some(y)) => SettingProfile::new(x.clone(), y.clone())?,
                _ => optimal_settings(n, &f)?.settings,
            };
            let t = simulate_design(n, &etas, &settings, a.trials, a.seed)?;
            (t, Some(etas), Some(settings))
        }
    };
    let n = trials.sites();
    let f = parse_functional(&a.functional, n)?;

    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut cfg = vec![("n", n.to_string()), ("functional", f.label())];
    match &a.input {
        Some(p) => cfg.push(("input", p.display().to_string())),
        None => {
            if let Some(e) = &etas {
                cfg.push(("etas", join(e.etas())));
            }
            cfg.push(("trials", a.trials.to_string()));
            if let Some(s) = &settings {
                cfg.push(("angles_a", join(&s.thetas_a)));
                cfg.push(("angles_b", join(&s.thetas_b)));
            }
        }
    }
    cfg.push(("write_trials", a.write_trials.to_string()));
    let meta = Metadata::new("simulate", config(&cfg), Some(trials.seed()));

    let report = estimate_functionals(&trials, &f)?;
    let env = envelope_for(n, &f)?;
    let violation = violation_report(&report, &env)?;

    if a.write_trials {
        let (path, mut out) = create(dir, &format!("trials_n{n}.csv"))?;
        write_trials_csv(&trials, &meta, &mut out)?;
        finish(path, out)?;
    }
    let (path, mut out) = create(dir, &format!("report_n{n}_{}.json", f.label()))?;
    write_json(
        &ReportJson {
            metadata: meta.clone(),
            estimate: report.clone(),
            violation: Some(violation.clone()),
        },
        &mut out,
    )?;
    finish(path, out)?;

    if let (Some(e), Some(s)) = (&etas, &settings) {
        let q = quantum_prediction(n, &f, e, &Settings::Explicit(s.clone()))?;
        println!("predicted: W = {:.6}, {f} = {:.6}", q.w, q.value);
    }
    println!(
        "estimated: W = {:.6} ± {:.6}, {f} = {:.6} ± {:.6}",
        report.w_hat, report.se_w, report.f_hat, report.se_f
    );
    println!("region = {}", violation.region.name());
    println!(
        "excess over envelope = {:.6}",
        violation.excess_over_envelope
    );
    println!(
        "excess over analytic bound = {:.6}",
        violation.excess_over_analytic
    );
    println!("significance = {:.3}", violation.significance);
    println!("violation = {}", violation.violates());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("1").unwrap(), Rational::from_integer(1));
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..8").unwrap(), (3, 8));
        assert_eq!(parse_range("3..=8").unwrap(), (3, 8));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("8..3").is_err());
    }

    #[test]
    fn grid_reaches_one() {
        let g = grid(0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(grid(0.25).unwrap().len(), 5);
    }

    #[test]
    fn signs() {
        assert_eq!(parse_signs("+-").unwrap(), (1, -1));
        assert!(parse_signs("+").is_err());
    }
}
