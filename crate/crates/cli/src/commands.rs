//! Table-emitting subcommands. All tables go to stdout; cache and
//! progress chatter goes to stderr.

use crate::{cache, fmt, EpsArg, Format};
use qcdel_core::bands::band_eigs;
use qcdel_core::families::{expansion_csv, expansion_error, FamilyKind, TranslationSpec};
use qcdel_core::floquet::{monodromy, FourierMode};
use qcdel_core::{make_params, Result};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub fn delaunay(dir: &Path, n: i64, eps: EpsArg, tol: f64, out: Option<PathBuf>) -> Result<()> {
    let params = make_params(n)?;
    let epsilon = eps.resolve(&params);
    let profile = cache::get_profile(dir, n, epsilon, tol)?;
    if let Some(path) = out {
        profile.save(&path)?;
    }
    println!("n,epsilon,period,energy,b_star");
    println!(
        "{},{},{},{},{}",
        n,
        fmt(profile.epsilon),
        fmt(profile.period),
        fmt(profile.energy),
        fmt(profile.b_star)
    );
    Ok(())
}

pub fn energy_table(
    dir: &Path,
    n: i64,
    frac_min: f64,
    frac_max: f64,
    count: usize,
    tol: f64,
    format: Format,
) -> Result<()> {
    if count < 2 || !(0.0 < frac_min && frac_min < frac_max && frac_max <= 1.0) {
        return Err(qcdel_core::Error::InvalidArgument(format!(
            "need count >= 2 and 0 < frac_min < frac_max <= 1, got {count}, {frac_min}, {frac_max}"
        )));
    }
    let params = make_params(n)?;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let f = frac_min + (frac_max - frac_min) * i as f64 / (count - 1) as f64;
        let epsilon = f * params.eps_n;
        let p = cache::get_profile(dir, n, epsilon, tol)?;
        rows.push((epsilon, p.period, p.energy, p.b_star));
    }
    match format {
        Format::Csv => {
            println!("n,epsilon,period,energy,b_star");
            for (e, t, h, b) in &rows {
                println!("{},{},{},{},{}", n, fmt(*e), fmt(*t), fmt(*h), fmt(*b));
            }
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|(e, t, h, b)| {
                    serde_json::json!({
                        "n": n, "epsilon": e, "period": t, "energy": h, "b_star": b
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&arr)?);
        }
    }
    Ok(())
}

pub fn indicial(dir: &Path, n: i64, eps: EpsArg, k_max: u32, tol: f64) -> Result<()> {
    let params = make_params(n)?;
    let epsilon = eps.resolve(&params);
    let profile = cache::get_profile(dir, n, epsilon, tol)?;
    println!("n,epsilon,k,gamma_0,gamma_1,gamma_2,gamma_3,det");
    for k in 0..=k_max {
        let mono = monodromy(&profile, FourierMode::new(params.n, k), tol.min(1e-12))?;
        let r = mono.indicial_roots;
        println!(
            "{},{},{},{},{},{},{},{}",
            n,
            fmt(epsilon),
            k,
            fmt(r[0]),
            fmt(r[1]),
            fmt(r[2]),
            fmt(r[3]),
            fmt(mono.det)
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn bands(
    dir: &Path,
    n: i64,
    eps: EpsArg,
    k: u32,
    phi_grid: usize,
    m_max: usize,
    truncation: usize,
    tol: f64,
    format: Format,
) -> Result<()> {
    if phi_grid < 2 {
        return Err(qcdel_core::Error::InvalidArgument(format!(
            "phi grid needs at least 2 points, got {phi_grid}"
        )));
    }
    let params = make_params(n)?;
    let epsilon = eps.resolve(&params);
    let profile = cache::get_profile(dir, n, epsilon, tol)?;
    let mode = FourierMode::new(params.n, k);
    let mut rows = Vec::with_capacity(phi_grid);
    for i in 0..phi_grid {
        let phi = PI * i as f64 / (phi_grid - 1) as f64;
        let vals = band_eigs(&profile, mode, phi, truncation)?;
        rows.push((phi, vals[..=m_max.min(vals.len() - 1)].to_vec()));
    }
    match format {
        Format::Csv => {
            let header: Vec<String> = (0..=m_max).map(|j| format!("sigma_{j}")).collect();
            println!("n,epsilon,k,phi,{}", header.join(","));
            for (phi, vals) in &rows {
                let cells: Vec<String> = vals.iter().map(|v| fmt(*v)).collect();
                println!("{},{},{},{},{}", n, fmt(epsilon), k, fmt(*phi), cells.join(","));
            }
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|(phi, vals)| {
                    serde_json::json!({
                        "n": n, "epsilon": epsilon, "k": k, "phi": phi, "sigma": vals
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&arr)?);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn expansion(
    dir: &Path,
    n: i64,
    eps: EpsArg,
    a_mag: f64,
    t0: f64,
    t1: f64,
    nt: usize,
    ns: usize,
    tol: f64,
) -> Result<()> {
    let params = make_params(n)?;
    let epsilon = eps.resolve(&params);
    let profile = cache::get_profile(dir, n, epsilon, tol)?;
    let spec = TranslationSpec::new(&profile, a_mag, FamilyKind::Kelvin, 0.0)?;
    let report = expansion_error(&spec, t0, t1, nt, ns)?;
    print!("{}", expansion_csv(&report));
    Ok(())
}
