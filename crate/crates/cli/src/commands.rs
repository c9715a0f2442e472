use std::path::{Path, PathBuf};

use serde_json::json;
use taukernel_core::coulomb::{critical_xi, endpoints_u0, endpoints_u0_alt, EquilibriumMeasure};
use taukernel_core::hankel_products::{
    hankel_product_kernel, integrable_kernel, laguerre_identity_check, HankelFactorization, IntegrableKernelSpec,
};
use taukernel_core::linsys::{kdv_hierarchy_check, DiscreteLinearSystem};
use taukernel_core::operator::{build_hankel, ScatteringFamily, ScatteringSpec, TabulatedWeight};
use taukernel_core::painleve::{barnes_formula_check, hankel_det, MAX_ORDER};
use taukernel_core::sinh_gordon::HowlandFamily;
use taukernel_core::specfun::halfline_rule;
use taukernel_core::verify::{self, VerifyConfig, CRITERIA};

use crate::config::{axis, Family, Format, Options, Weight};
use crate::output::{col, ensure_dir, fmt_f64, write_json, write_text, Table};
use crate::svg;
use crate::CliError;

/// Result of a subcommand: pass/fail plus the files written.
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

fn display(files: &[PathBuf]) -> Vec<String> {
    files.iter().map(|p| p.display().to_string()).collect()
}

fn svg_file(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let p = dir.join(name);
    write_text(&p, body)?;
    files.push(p);
    Ok(())
}

fn summary_file(dir: &Path, name: &str, mut value: serde_json::Value, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let p = dir.join(name);
    files.push(p.clone());
    value["files"] = json!(display(files));
    write_json(&p, &value)?;
    Ok(())
}

fn weight_name(w: Weight) -> &'static str {
    match w {
        Weight::Zero => "zero",
        Weight::One => "one",
        Weight::Exp => "exp",
        Weight::ExpInv => "exp-inv",
    }
}

pub fn sinh_gordon(o: &Options) -> Result<Outcome, CliError> {
    let n = o.n.unwrap_or(300);
    let weight = o.weight.unwrap_or(Weight::Exp);
    let tol = o.tol.unwrap_or(1e-4);
    let step = o.step.unwrap_or(5e-3);
    let xs = axis("x", o.x_min.unwrap_or(0.8), o.x_max.unwrap_or(1.6), o.x_step.unwrap_or(0.1))?;
    let ts = axis("t", o.t_min.unwrap_or(0.8), o.t_max.unwrap_or(1.6), o.t_step.unwrap_or(0.1))?;
    let fam = HowlandFamily::new(TabulatedWeight::from_fn(halfline_rule(n, 1.0)?, |y| weight.eval(y)));
    let g = fam.sinh_gordon_grid(&xs, &ts, step)?;

    let mut phase = Table::new(vec![col("x", "1"), col("t", "1"), col("S", "1"), col("V", "1"), col("W", "1")]);
    let mut resid = Table::new(vec![
        col("x", "1"),
        col("t", "1"),
        col("S_xt", "1"),
        col("2sinh2S", "1"),
        col("residual_sg", "1"),
    ]);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            phase.push(vec![x, t, g.s[i][j], g.v_diag[i][j], g.w_diag[i][j]]);
            resid.push(vec![x, t, g.mixed[i][j], 2.0 * (2.0 * g.s[i][j]).sinh(), g.residual_sg[i][j]]);
        }
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![
        phase.write(&dir, "sinh_gordon_phase", o.format())?,
        resid.write(&dir, "sinh_gordon_residual", o.format())?,
    ];
    let map = svg::heat_map("sinh-Gordon residual |S_xt - 2 sinh 2S|", "x", "t", &xs, &ts, &g.residual_sg);
    svg_file(&dir, "sinh_gordon_residual.svg", &map, &mut files)?;
    let max = g.max_residual();
    let passed = max <= tol;
    println!("sinh-gordon: max residual {} (tolerance {tol:e}) {}", fmt_f64(max), verdict(passed));
    summary_file(
        &dir,
        "sinh_gordon_summary.json",
        json!({
            "command": "sinh-gordon",
            "n": n,
            "weight": weight_name(weight),
            "step": step,
            "max_residual": max,
            "mean_residual": g.mean_residual(),
            "tolerance": tol,
            "passed": passed,
        }),
        &mut files,
    )?;
    Ok(Outcome { passed, files })
}

pub fn tau(o: &Options) -> Result<Outcome, CliError> {
    let n = o.n.unwrap_or(240);
    let family = o.family.unwrap_or(Family::Exp);
    let tol = o.tol.unwrap_or(1e-9);
    let xs = axis("x", o.x_min.unwrap_or(0.5), o.x_max.unwrap_or(3.0), o.x_step.unwrap_or(0.25))?;
    let base = match family {
        Family::Exp => ScatteringFamily::RankOneExp { c: 1.0 },
        Family::Bessel => ScatteringFamily::BesselK1 { s: o.s.unwrap_or(1.0) },
        Family::Airy => ScatteringFamily::AiryHalf,
        Family::Howland => ScatteringFamily::HowlandWeight {
            weight: TabulatedWeight::from_fn(halfline_rule(n, 1.0)?, |y| (-y).exp()),
            t: o.t.unwrap_or(1.0),
        },
    };
    let base = ScatteringSpec::new(base)?;
    let mut table = Table::new(vec![
        col("x", "1"),
        col("det_plus", "1"),
        col("det_minus", "1"),
        col("log_tau", "1"),
        col("hs_norm", "1"),
        col("eigen_residual", "1"),
    ]);
    let mut worst: f64 = 0.0;
    for &x in &xs {
        let spec = base.clone().with_shift(x)?;
        let op = build_hankel(&spec, halfline_rule(n, spec.default_scale())?)?;
        let mut dets = [0.0; 2];
        let mut eig_res: f64 = 0.0;
        for (k, lambda) in [1.0, -1.0].into_iter().enumerate() {
            dets[k] = op.fredholm_det(lambda).real();
            let e = op.eigenvalue_det(lambda);
            eig_res = eig_res.max((dets[k] - e).abs() / dets[k].abs().max(1.0));
        }
        worst = worst.max(eig_res);
        table.push(vec![x, dets[0], dets[1], dets[0].ln(), op.hs_norm(), eig_res]);
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![table.write(&dir, "tau", o.format())?];
    let plus: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[1].ln())).collect();
    let minus: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[2].ln())).collect();
    let plot = svg::line_plot(
        "log det(I +- Gamma_phi(x))",
        "x",
        "log det",
        &[("lambda = +1", plus), ("lambda = -1", minus)],
    );
    svg_file(&dir, "tau.svg", &plot, &mut files)?;
    let passed = worst <= tol;
    println!("tau: LU vs eigenvalue determinant {} (tolerance {tol:e}) {}", fmt_f64(worst), verdict(passed));
    summary_file(
        &dir,
        "tau_summary.json",
        json!({
            "command": "tau",
            "n": n,
            "family": format!("{family:?}").to_lowercase(),
            "max_eigen_residual": worst,
            "tolerance": tol,
            "passed": passed,
        }),
        &mut files,
    )?;
    Ok(Outcome { passed, files })
}

pub fn hankel_det_cmd(o: &Options) -> Result<Outcome, CliError> {
    let alpha = o.alpha.unwrap_or(0.0);
    let order = o.order.unwrap_or(4);
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(CliError::Usage(format!("order must be 1..={MAX_ORDER}, got {order}")));
    }
    let tol = o.tol.unwrap_or(1e-7);
    let ss = axis("s", o.s_min.unwrap_or(0.0), o.s_max.unwrap_or(2.0), o.s_step.unwrap_or(0.25))?;
    if ss[0] < 0.0 {
        return Err(CliError::Usage("s must be non-negative".into()));
    }
    let mut table = Table::new(vec![
        col("n", "1"),
        col("s", "1"),
        col("log_D", "1"),
        col("sign", "1"),
        col("condition", "1"),
        col("min_eigenvalue", "1"),
    ]);
    let mut per_n = Vec::new();
    let mut series = Vec::new();
    let mut passed = true;
    for n in 1..=order {
        let mut logs = Vec::with_capacity(ss.len());
        for &s in &ss {
            let d = hankel_det(alpha, s, n)?;
            table.push(vec![n as f64, s, d.log_det, d.sign, d.condition, d.min_eigenvalue]);
            logs.push(d.log_det);
        }
        let monotone = logs.windows(2).all(|p| p[1] < p[0]);
        let barnes = barnes_formula_check(alpha, n)?;
        let ok = monotone && barnes.relative_residual <= tol;
        passed &= ok;
        per_n.push(json!({
            "n": n,
            "barnes_log_det": barnes.log_det,
            "barnes_log_formula": barnes.log_formula,
            "barnes_relative_residual": barnes.relative_residual,
            "monotone_decrease": monotone,
            "passed": ok,
        }));
        series.push((format!("n = {n}"), ss.iter().copied().zip(logs).collect::<Vec<_>>()));
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![table.write(&dir, "hankel_det", o.format())?];
    let named: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(l, p)| (l.as_str(), p.clone())).collect();
    svg_file(&dir, "hankel_det.svg", &svg::line_plot("log D_n(s)", "s", "log D_n", &named), &mut files)?;
    println!("hankel-det: alpha {alpha}, n <= {order}, {} s values {}", ss.len(), verdict(passed));
    summary_file(
        &dir,
        "hankel_det_summary.json",
        json!({ "command": "hankel-det", "alpha": alpha, "order": order, "tolerance": tol, "orders": per_n, "passed": passed }),
        &mut files,
    )?;
    Ok(Outcome { passed, files })
}

pub fn equilibrium(o: &Options) -> Result<Outcome, CliError> {
    let xi = o.xi.unwrap_or(0.1);
    let samples = o.n.unwrap_or(400);
    let tol = o.tol.unwrap_or(1e-5);
    let (a, b) = endpoints_u0(xi)?;
    let (a2, b2) = endpoints_u0_alt(xi)?;
    let m = EquilibriumMeasure::sigma0(xi)?;
    let singular = m.singular_integral_residual(&m.probe_points())?;
    let mut table = Table::new(vec![col("x", "1"), col("sigma0", "1/length"), col("sigma0_unit_mass", "1/length")]);
    for k in 0..=samples {
        let x = a + (b - a) * k as f64 / samples as f64;
        let d = m.density(x);
        table.push(vec![x, d, d / m.mass]);
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![table.write(&dir, "equilibrium_density", o.format())?];
    let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[1])).collect();
    svg_file(
        &dir,
        "equilibrium_density.svg",
        &svg::line_plot(&format!("sigma_0, xi = {xi}"), "x", "density", &[("sigma_0", pts)]),
        &mut files,
    )?;
    let passed = singular <= tol;
    println!(
        "equilibrium: [a, b] = [{}, {}], mass {}, singular residual {} {}",
        fmt_f64(a),
        fmt_f64(b),
        fmt_f64(m.mass),
        fmt_f64(singular),
        verdict(passed)
    );
    let endpoints = json!({
        "command": "equilibrium",
        "xi": xi,
        "a": a,
        "b": b,
        "a_alt": a2,
        "b_alt": b2,
        "endpoint_difference": (a - a2).abs().max((b - b2).abs()),
        "support_inside_unit_interval": b < 1.0,
        "critical_xi": critical_xi(),
        "mass": m.mass,
        "min_density": m.min_density(2000),
        "singular_residual": singular,
        "tolerance": tol,
        "passed": passed,
    });
    summary_file(&dir, "equilibrium_endpoints.json", endpoints, &mut files)?;
    Ok(Outcome { passed, files })
}

pub fn hankel_product(o: &Options) -> Result<Outcome, CliError> {
    let degree = o.order.unwrap_or(1);
    let n = o.n.unwrap_or(400);
    let tol = o.tol.unwrap_or(1e-8);
    let zs = axis("z", o.x_min.unwrap_or(0.3), o.x_max.unwrap_or(4.3), o.x_step.unwrap_or(0.5))?;
    if zs[0] <= 0.0 {
        return Err(CliError::Usage("z samples must be positive".into()));
    }
    let spec = IntegrableKernelSpec::laguerre(degree, 1.0)?;
    let fact = HankelFactorization::laguerre(degree);
    let rule = halfline_rule(n, 4.0)?;
    let mut table = Table::new(vec![
        col("z", "1"),
        col("w", "1"),
        col("kernel", "1"),
        col("hankel_product", "1"),
        col("difference", "1"),
        col("single_product", "1"),
    ]);
    let (mut worst, mut rmin, mut rmax): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for &z in &zs {
        for &w in &zs {
            let k = integrable_kernel(&spec, z, w)?;
            let h = hankel_product_kernel(&fact, z, w, &rule)?;
            let printed = laguerre_identity_check(degree, z, w)?;
            worst = worst.max((k - h).abs());
            rmin = rmin.min(printed.ratio);
            rmax = rmax.max(printed.ratio);
            table.push(vec![z, w, k, h, k - h, printed.rhs]);
        }
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![table.write(&dir, "hankel_product", o.format())?];
    let diag: Vec<(f64, f64)> = zs.iter().map(|&z| (z, integrable_kernel(&spec, z, z).unwrap_or(f64::NAN))).collect();
    svg_file(
        &dir,
        "hankel_product.svg",
        &svg::line_plot(&format!("Laguerre kernel diagonal, n = {degree}"), "z", "k(z,z)", &[("k(z,z)", diag)]),
        &mut files,
    )?;
    let passed = worst <= tol;
    println!(
        "hankel-product: max |k - sum Gamma_psi Gamma_phi| {} (tolerance {tol:e}) {}; kernel / single product in [{rmin:.6}, {rmax:.6}]",
        fmt_f64(worst),
        verdict(passed)
    );
    summary_file(
        &dir,
        "hankel_product_summary.json",
        json!({
            "command": "hankel-product",
            "degree": degree,
            "alpha": 1.0,
            "n": n,
            "max_difference": worst,
            "single_product_ratio_min": rmin,
            "single_product_ratio_max": rmax,
            "tolerance": tol,
            "passed": passed,
        }),
        &mut files,
    )?;
    Ok(Outcome { passed, files })
}

pub fn kdv(o: &Options) -> Result<Outcome, CliError> {
    let n = o.n.unwrap_or(120);
    let weight = o.weight.unwrap_or(Weight::ExpInv);
    let t = o.t.unwrap_or(1.0);
    let ell = o.order.unwrap_or(2);
    if !(1..=3).contains(&ell) {
        return Err(CliError::Usage(format!("order must be 1..=3, got {ell}")));
    }
    let (lo, hi, step) = (o.x_min.unwrap_or(0.5), o.x_max.unwrap_or(2.0), o.x_step.unwrap_or(1e-3));
    let xs = axis("x", lo, hi, step)?;
    // two stencil points beyond each end so the residual covers [lo, hi]
    let padded: Vec<f64> = (0..xs.len() + 4).map(|k| lo + step * (k as f64 - 2.0)).collect();
    let sys = DiscreteLinearSystem::howland(&TabulatedWeight::from_fn(halfline_rule(n, 1.0)?, |y| weight.eval(y)), t)?;
    let residuals = kdv_hierarchy_check(&sys, &padded, ell as u32)?;
    let names = [col("f1", "1"), col("f2", "1"), col("f3", "1")];
    let mut columns = vec![col("x", "1"), col("u", "1")];
    columns.extend_from_slice(&names[..ell]);
    let mut table = Table::new(columns);
    for &x in &xs {
        let ctx = sys.at(x)?;
        let mut row = vec![x, ctx.potential()];
        row.extend((1..=ell as u32).map(|l| ctx.kdv_term(l)));
        table.push(row);
    }
    let defaults = [1e-4, 1e-3, 1e-2];
    let checks: Vec<_> = residuals
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let tol = o.tol.unwrap_or(defaults[k]);
            json!({ "ell": k + 1, "residual": r, "tolerance": tol, "passed": r <= tol })
        })
        .collect();
    let passed = checks.iter().all(|c| c["passed"] == json!(true));
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let mut files = vec![table.write(&dir, "kdv", o.format())?];
    let u: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[0], r[1])).collect();
    svg_file(&dir, "kdv_potential.svg", &svg::line_plot("potential u(x)", "x", "u", &[("u", u)]), &mut files)?;
    let shown: Vec<String> = residuals.iter().map(|r| fmt_f64(*r)).collect();
    println!("kdv: residuals {} {}", shown.join(", "), verdict(passed));
    summary_file(
        &dir,
        "kdv_summary.json",
        json!({ "command": "kdv", "n": n, "weight": weight_name(weight), "t": t, "step": step, "checks": checks, "passed": passed }),
        &mut files,
    )?;
    Ok(Outcome { passed, files })
}

pub fn verify_cmd(o: &Options) -> Result<Outcome, CliError> {
    let criteria = o.criteria.clone().unwrap_or_default();
    if let Some(bad) = criteria.iter().find(|c| !(1..=CRITERIA).contains(*c)) {
        return Err(CliError::Usage(format!("criterion {bad} outside 1..={CRITERIA}")));
    }
    let cfg = VerifyConfig { tolerance: o.tol, seed: o.seed.unwrap_or(VerifyConfig::default().seed) };
    let report = verify::run(&criteria, &cfg);
    for r in &report.records {
        println!(
            "{} {:<28} residual {:>24} tolerance {:e}{}",
            verdict(r.passed),
            r.id,
            fmt_f64(r.residual),
            r.tolerance,
            r.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
    }
    for c in &report.criteria {
        println!("criterion {:>2}: {} ({} checks, {:.2} s)", c.criterion, verdict(c.passed), c.checks, c.seconds);
    }
    let dir = o.out_dir();
    ensure_dir(&dir)?;
    let path = dir.join("verify_report.json");
    write_json(&path, &report)?;
    let mut files = vec![path];
    if o.format() == Format::Csv {
        let path = dir.join("verify_report.csv");
        let err = |e: csv::Error| CliError::Numeric(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(["criterion [1]", "id [-]", "residual [1]", "tolerance [1]", "passed [-]"]).map_err(err)?;
        for r in &report.records {
            w.write_record([
                r.criterion.to_string(),
                r.id.clone(),
                fmt_f64(r.residual),
                fmt_f64(r.tolerance),
                r.passed.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Numeric(e.to_string()))?;
        files.push(path);
    }
    let failed = report.failed().count();
    println!("verify: {} checks, {failed} failed {}", report.records.len(), verdict(report.passed));
    Ok(Outcome { passed: report.passed, files })
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}
