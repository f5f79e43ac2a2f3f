use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use cocycle_lab::circle::CirclePoint;
use cocycle_lab::coboundary::{appendix_series, criterion_series, criterion_series_with, h4_series, h4_series_with, solve_transfer};
use cocycle_lab::contfrac::{AlphaHandle, Expr};
use cocycle_lab::ostrowski::{construct_special_beta, expand, hr_partial_sums, OstrowskiDigits};
use cocycle_lab::skewsim::{
    essential_value_probe, iterate, quotient_distribution, seeded_point, shadowing_horizon, verify_commutation, IterateOptions,
    IterateResult, ProbeTarget, Psi, SkewState,
};
use cocycle_lab::stepcocycle::{birkhoff_fast, birkhoff_naive, StepCocycle};
use cocycle_lab::verify::{verify_all, FaultInjection, Profile};
use cocycle_lab::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::report::{read_json, Context, ResolvedPoint};

/// Text for stdout and the process exit code.
pub struct Output {
    pub text: String,
    pub code: ExitCode,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: ExitCode::SUCCESS }
    }
}

/// Runs one command line (without the program name).
pub fn run(argv: &[String]) -> CliResult<Output> {
    let cli = match Cli::try_parse_from(std::iter::once("cocycle-lab".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => return Ok(Output::ok(e.to_string())),
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let mut ctx = Context::new(argv, cli.timing);
    match cli.command {
        Command::Cf(c) => cf(&mut ctx, c).and_then(|(k, v)| ctx.finish(k, &v)).map(Output::ok),
        Command::Ostrowski(c) => ostrowski(&mut ctx, c).and_then(|(k, v)| ctx.finish(k, &v)).map(Output::ok),
        Command::Cocycle(c) => cocycle(ctx, c),
        Command::Coboundary(c) => coboundary(&mut ctx, c).and_then(|(k, v)| ctx.finish(k, &v)).map(Output::ok),
        Command::Skew(c) => skew(ctx, c),
        Command::Verify(a) => verify(ctx, a),
        Command::Replay(a) => replay(&a),
    }
}

type Report = (&'static str, Value);

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(e.to_string()))
}

fn cf(ctx: &mut Context, c: CfCommand) -> CliResult<Report> {
    match c {
        CfCommand::Convergents { alpha, n } => {
            let h = ctx.alpha(&alpha.alpha)?;
            ctx.horizon("n", n as u64);
            let mut rows = Vec::with_capacity(n + 2);
            for i in -1..=n as isize {
                let (p, q) = h.convergent(i)?;
                let a = if i >= 1 { Some(h.partial_quotient(i as usize)?.to_string()) } else { None };
                rows.push(json!({ "n": i, "a_n": a, "p": p.to_string(), "q": q.to_string() }));
            }
            Ok(("cf-convergents", json!({ "alpha": h.spec().to_string(), "convergents": rows })))
        }
        CfCommand::Enclosure { alpha, depth } => {
            let h = ctx.alpha(&alpha.alpha)?;
            ctx.horizon("depth", depth as u64);
            let e = h.enclosure(depth)?;
            Ok(("cf-enclosure", json!({ "alpha": h.spec().to_string(), "depth": depth, "enclosure": to_value(&e)?, "width": e.width().to_string() })))
        }
        CfCommand::Norm { alpha, k, bits } => {
            let h = ctx.alpha(&alpha.alpha)?;
            let k: BigInt = k.parse().map_err(|_| CliError::Usage(format!("--k `{k}` is not an integer")))?;
            let width = BigRational::new(BigInt::from(1), BigInt::from(1) << bits);
            let v = h.norm_k_alpha(&k, &width)?;
            Ok(("cf-norm", json!({ "alpha": h.spec().to_string(), "norm": to_value(&v)?, "target_width": width.to_string() })))
        }
    }
}

fn ostrowski(ctx: &mut Context, c: OstrowskiCommand) -> CliResult<Report> {
    match c {
        OstrowskiCommand::Expand { alpha, beta, horizon, r } => {
            let h = ctx.alpha(&alpha.alpha)?;
            ctx.horizon("horizon", horizon as u64);
            let beta = ctx.point(&h, "beta", &beta)?.point;
            let d = expand(&h, &beta, horizon)?;
            let hr = r.iter().map(|&r| hr_partial_sums(&d, &h, r)).collect::<Result<Vec<_>, Error>>()?;
            Ok(("ostrowski-expand", json!({ "beta": beta, "expansion": to_value(&d)?, "weight": d.weight(&h)?.to_string(), "h_r": to_value(&hr)? })))
        }
        OstrowskiCommand::ConstructBeta { alpha, d, n_max, terms } => {
            let h = ctx.alpha(&alpha.alpha)?;
            ctx.horizon("n_max", n_max as u64);
            let plan = construct_special_beta(&h, &Expr::parse(&d)?, n_max)?;
            let terms = terms.unwrap_or(n_max.saturating_sub(1));
            ctx.horizon("terms", terms as u64);
            let (beta, digits) = plan.beta(&h, terms)?;
            let horizon = shadowing_horizon(&digits.tail_bound).map(|n| n.to_string());
            Ok((
                "ostrowski-construct-beta",
                json!({ "plan": to_value(&plan)?, "terms": terms, "beta": beta, "truncated": to_value(&digits)?, "shadowing_horizon": horizon }),
            ))
        }
    }
}

/// The cocycle `φ_β` or `φ_{β,γ}` and the tail bound of any truncated plan parameter.
struct Built {
    h: AlphaHandle,
    f: StepCocycle,
    beta: ResolvedPoint,
    tail: Option<BigRational>,
}

fn build(ctx: &mut Context, a: &CocycleArgs) -> CliResult<Built> {
    let h = ctx.alpha(&a.alpha.alpha)?;
    let beta = ctx.point(&h, "beta", &a.beta)?;
    let gamma = a.gamma.as_deref().map(|g| ctx.point(&h, "gamma", g)).transpose()?;
    let f = match &gamma {
        Some(g) => StepCocycle::phi_beta_gamma(&h, &beta.point, &g.point)?,
        None => StepCocycle::phi_beta(&h, &beta.point)?,
    };
    let tail = [Some(&beta), gamma.as_ref()]
        .into_iter()
        .flatten()
        .filter_map(|p| p.digits.as_ref().map(|d| d.tail_bound.clone()))
        .filter(|t| *t > BigRational::from_integer(0.into()))
        .max();
    Ok(Built { h, f, beta, tail })
}

/// Refuses runs longer than the shadowing horizon of a truncated parameter.
fn guard(b: &Built, steps: u64) -> CliResult<()> {
    if let Some(h) = b.tail.as_ref().and_then(shadowing_horizon) {
        if steps > h {
            return Err(Error::ShadowingGuard(format!("{steps} steps exceed the shadowing horizon {h} of the truncated parameter")).into());
        }
    }
    Ok(())
}

fn start_point(ctx: &mut Context, h: &AlphaHandle, s: &StartArgs) -> CliResult<CirclePoint> {
    Ok(match &s.x {
        Some(x) => ctx.point(h, "x", x)?.point,
        None => {
            ctx.seed("x", s.seed);
            let p = seeded_point(s.seed);
            ctx.manifest.points.insert("x".into(), p.to_string());
            p
        }
    })
}

fn trajectory_csv(b: &Built, r: &IterateResult) -> CliResult<String> {
    let beta = b.beta.point.to_f64(&b.h)?;
    let mut s = String::from("j,x_j,y_j,y_u,y_v\n");
    for p in r.trajectory.as_deref().unwrap_or_default() {
        let y = p.u as f64 + p.v as f64 * beta;
        writeln!(s, "{},{:?},{:?},{},{}", p.j, p.x.get(), y, p.u, p.v).unwrap();
    }
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    let err = |e: std::io::Error| CliError::File { path: path.display().to_string(), message: e.to_string() };
    let mut f = std::fs::File::create(path).map_err(err)?;
    f.write_all(text.as_bytes()).map_err(err)
}

/// Runs the exact iteration, handling the CSV outputs; `None` means the CSV went to stdout.
fn simulate(b: &Built, x: &CirclePoint, n: u64, out: &TrajectoryArgs) -> CliResult<(IterateResult, Option<String>)> {
    let want = out.csv || out.trajectory.is_some();
    let opts = IterateOptions { trajectory: want, tail_bound: b.tail.clone() };
    let mut r = iterate(&b.h, &b.f, &SkewState::new(x.clone()), n, &opts)?;
    let mut stdout = None;
    if want {
        let csv = trajectory_csv(b, &r)?;
        match &out.trajectory {
            Some(p) => write_file(p, &csv)?,
            None => stdout = Some(csv),
        }
        r.trajectory = None;
    }
    Ok((r, stdout))
}

fn cocycle(mut ctx: Context, c: CocycleCommand) -> CliResult<Output> {
    let CocycleCommand::Birkhoff { cocycle, x, n, method, out } = c;
    let b = build(&mut ctx, &cocycle)?;
    let x = ctx.point(&b.h, "x", &x)?.point;
    ctx.horizon("n", n);
    guard(&b, n)?;
    let fast = matches!(method, MethodArg::Fast | MethodArg::Both).then(|| birkhoff_fast(&b.h, &b.f, &x, n)).transpose()?;
    let naive = matches!(method, MethodArg::Naive | MethodArg::Both).then(|| birkhoff_naive(&b.h, &b.f, &x, n)).transpose()?;
    let agree = match (&fast, &naive) {
        (Some(a), Some(b)) => Some(a.value == b.value),
        _ => None,
    };
    let mut trajectory = None;
    if out.csv || out.trajectory.is_some() {
        let (_, csv) = simulate(&b, &x, n, &out)?;
        if let Some(csv) = csv {
            return Ok(Output::ok(csv));
        }
        trajectory = out.trajectory.as_ref().map(|p| p.display().to_string());
    }
    let v = json!({ "cocycle": to_value(&b.f)?, "x": x, "n": n, "fast": to_value(&fast)?, "naive": to_value(&naive)?, "agree": agree, "trajectory_file": trajectory });
    ctx.finish("cocycle-birkhoff", &v).map(Output::ok)
}

fn coboundary(ctx: &mut Context, c: CoboundaryCommand) -> CliResult<Report> {
    match c {
        CoboundaryCommand::Solve { alpha, beta, gamma, n, grid } => {
            let h = ctx.alpha(&alpha.alpha)?;
            let beta = ctx.point(&h, "beta", &beta)?.point;
            let gamma = ctx.point(&h, "gamma", &gamma)?.point;
            ctx.horizon("N", n);
            ctx.horizon("grid", grid);
            let sol = solve_transfer(&h, &beta, &gamma, usize_of(n, "--N")?, usize_of(grid, "--grid")?)?;
            Ok(("coboundary-solve", to_value(&sol)?))
        }
        CoboundaryCommand::Series { id, alpha, beta, gamma, n, cutoffs } => {
            let h = ctx.alpha(&alpha.alpha)?;
            let beta = ctx.point(&h, "beta", &beta)?;
            ctx.horizon("N", n);
            let cut = |c: &Vec<u64>| -> CliResult<Vec<u64>> {
                let mut c = c.clone();
                if c.iter().any(|&k| k == 0 || k > n) {
                    return Err(CliError::Usage(format!("cutoffs must lie in 1..={n}")));
                }
                c.sort_unstable();
                c.dedup();
                Ok(c)
            };
            let report = match id {
                SeriesId::Criterion => {
                    let g = gamma.ok_or_else(|| CliError::Usage("--id criterion needs --gamma".into()))?;
                    let g = ctx.point(&h, "gamma", &g)?.point;
                    if cutoffs.is_empty() {
                        criterion_series(&h, &beta.point, &g, n)?
                    } else {
                        criterion_series_with(&h, &beta.point, &g, n, &cut(&cutoffs)?)?
                    }
                }
                SeriesId::H4 if cutoffs.is_empty() => h4_series(&h, &beta.point, n)?,
                SeriesId::H4 => h4_series_with(&h, &beta.point, n, &cut(&cutoffs)?)?,
                letter => {
                    if !cutoffs.is_empty() {
                        return Err(CliError::Usage("--cutoffs applies to criterion and h4 only".into()));
                    }
                    let digits = digits_for(&h, &beta, n)?;
                    let name = format!("{letter:?}");
                    let all = appendix_series(&h, &digits, &beta.point, n)?;
                    let r = all.get(&name).cloned().ok_or_else(|| CliError::Usage(format!("no series {name}")))?;
                    return Ok(("coboundary-series", json!({ "series": to_value(&r)?, "digits": to_value(&digits)?, "blocks": to_value(&all.blocks)?, "counts": to_value(&all.counts)? })));
                }
            };
            Ok(("coboundary-series", json!({ "series": to_value(&report)? })))
        }
    }
}

/// Plan digits when given, else the greedy expansion up to the first `q_j > N`.
fn digits_for(h: &AlphaHandle, beta: &ResolvedPoint, n: u64) -> CliResult<OstrowskiDigits> {
    if let Some(d) = &beta.digits {
        return Ok(d.clone());
    }
    let j = h.last_index_with_q_at_most(&BigInt::from(n))?;
    Ok(expand(h, &beta.point, j + 1)?)
}

fn usize_of(n: u64, flag: &str) -> CliResult<usize> {
    usize::try_from(n).map_err(|_| CliError::Usage(format!("{flag} {n} is too large")))
}

fn skew(mut ctx: Context, c: SkewCommand) -> CliResult<Output> {
    let (kind, v) = match c {
        SkewCommand::Simulate { cocycle, start, n, out } => {
            let b = build(&mut ctx, &cocycle)?;
            let x = start_point(&mut ctx, &b.h, &start)?;
            ctx.horizon("n", n);
            let (r, csv) = simulate(&b, &x, n, &out)?;
            if let Some(csv) = csv {
                return Ok(Output::ok(csv));
            }
            let horizon = b.tail.as_ref().and_then(shadowing_horizon);
            ("skew-simulate", json!({ "cocycle": to_value(&b.f)?, "x0": x, "run": to_value(&r)?, "shadowing_horizon": horizon, "trajectory_file": out.trajectory.map(|p| p.display().to_string()) }))
        }
        SkewCommand::Quotient { cocycle, start, a, n, burn_in, joint_depth } => {
            let b = build(&mut ctx, &cocycle)?;
            let x = start_point(&mut ctx, &b.h, &start)?;
            ctx.horizon("n", n);
            ctx.horizon("burn_in", burn_in);
            guard(&b, n.saturating_add(burn_in))?;
            let hist = quotient_distribution(&b.h, &b.f, &a, n, burn_in, &x, joint_depth)?;
            ("skew-quotient", json!({ "cocycle": to_value(&b.f)?, "x0": x, "histograms": to_value(&hist)? }))
        }
        SkewCommand::Probe { cocycle, value, value_beta, infinity, depth, nmax, seed } => {
            let b = build(&mut ctx, &cocycle)?;
            ctx.seed("x", seed);
            ctx.horizon("nmax", nmax);
            ctx.horizon("depth", depth as u64);
            guard(&b, nmax)?;
            let target = match (value, infinity) {
                (_, Some(t)) => ProbeTarget::Infinity { threshold: t },
                (Some(u), None) => ProbeTarget::Value { u, v: value_beta },
                (None, None) => return Err(CliError::Usage("give --value or --infinity".into())),
            };
            let p = essential_value_probe(&b.h, &b.f, target, depth, nmax, seed)?;
            ("skew-probe", json!({ "cocycle": to_value(&b.f)?, "probe": to_value(&p)? }))
        }
        SkewCommand::Commute { psi, gamma, epsilon } => {
            let doc = read_json(&psi)?;
            let field = |k: &str| -> CliResult<&Value> {
                doc.pointer(&format!("/result/{k}")).ok_or_else(|| CliError::File { path: psi.clone(), message: format!("missing result.{k}; expected a `coboundary solve` report") })
            };
            let text = |k: &str| -> CliResult<String> {
                field(k)?.as_str().map(str::to_string).ok_or_else(|| CliError::File { path: psi.clone(), message: format!("result.{k} must be a string") })
            };
            let num = |k: &str| -> CliResult<u64> {
                field(k)?.as_u64().ok_or_else(|| CliError::File { path: psi.clone(), message: format!("result.{k} must be a count") })
            };
            let h = ctx.alpha(&text("alpha")?)?;
            let beta = ctx.point(&h, "beta", &text("beta")?)?.point;
            let solved_gamma = ctx.point(&h, "solution_gamma", &text("gamma")?)?.point;
            let gamma = match gamma {
                Some(g) => ctx.point(&h, "gamma", &g)?.point,
                None => solved_gamma.clone(),
            };
            let (n, grid) = (num("n_max")?, num("grid")?);
            ctx.horizon("N", n);
            ctx.horizon("grid", grid);
            let sol = solve_transfer(&h, &beta, &solved_gamma, usize_of(n, "N")?, usize_of(grid, "grid")?)?;
            let phi = StepCocycle::phi_beta(&h, &beta)?;
            let r = verify_commutation(&h, &phi, &gamma, &Psi::Series(&sol), epsilon, 0)?;
            ("skew-commute", to_value(&r)?)
        }
    };
    ctx.finish(kind, &v).map(Output::ok)
}

fn verify(ctx: Context, a: VerifyArgs) -> CliResult<Output> {
    let profile = match a.profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let summary = verify_all(profile, &FaultInjection { convergent: a.inject_convergent_fault });
    let code = if summary.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    let text = if a.json {
        ctx.finish("verify", &summary)?
    } else {
        let mut s = String::new();
        for r in &summary.results {
            writeln!(s, "{r}").unwrap();
        }
        writeln!(s, "{} passed, {} failed ({} profile)", summary.passed, summary.failed, summary.profile).unwrap();
        s
    };
    Ok(Output { text, code })
}

fn replay(a: &ReplayArgs) -> CliResult<Output> {
    let doc = read_json(&a.report)?;
    let argv: Vec<String> = doc
        .pointer("/manifest/command_line")
        .and_then(Value::as_array)
        .and_then(|v| v.iter().map(|s| s.as_str().map(str::to_string)).collect())
        .ok_or_else(|| CliError::File { path: a.report.clone(), message: "no manifest.command_line".into() })?;
    if argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage("refusing to replay a replay".into()));
    }
    run(&argv)
}
