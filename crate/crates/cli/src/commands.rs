use std::path::Path;

use arvcanon::coefficients::file::{arov_to_json, parse_coefficients, Coefficients};
use arvcanon::riccati::{riccati_trajectory, RiccatiStatus};
use arvcanon::weyl::{schur_minus_with, schur_trace, DiskFlow};
use arvcanon::{
    bp_defect, exponential_type, recover_parameters, reflectionless_defect, schur_plus, to_arov_gauge,
    to_pdb_gauge, transfer, Arc, ArovParameters, CanonicalSystem, Complex64, FullLine, Mat2, SchurOptions,
    TransferFamily,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::grids;
use crate::output::{config_hash, num, Table};
use crate::{Command, GaugeTarget, LArgs, ZArgs};

const MATRIX_COLUMNS: [&str; 8] =
    ["a11_re", "a11_im", "a12_re", "a12_im", "a21_re", "a21_im", "a22_re", "a22_im"];
const GRID_UNITS: &str = "z = spectral parameter, l = grid length; other columns dimensionless";

struct Input {
    text: String,
    coefficients: Coefficients,
}

impl Input {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
        let coefficients = parse_coefficients(&text)?;
        Ok(Self { text, coefficients })
    }

    fn system(&self) -> &dyn CanonicalSystem {
        match &self.coefficients {
            Coefficients::Arov(p) => p,
            Coefficients::General(c) => c,
        }
    }

    fn arov(&self, path: &Path) -> Result<&ArovParameters, CliError> {
        match &self.coefficients {
            Coefficients::Arov(p) => Ok(p),
            Coefficients::General(_) => Err(CliError::Validation(format!(
                "{} holds general coefficients; this command needs Arov parameters (convert with `gauge`)",
                path.display()
            ))),
        }
    }
}

fn zs(args: &ZArgs) -> Result<Vec<Complex64>, CliError> {
    match (&args.z, &args.zgrid) {
        (Some(z), None) => Ok(vec![grids::complex(z)?]),
        (None, Some(g)) => grids::z_grid(g),
        _ => Err(CliError::parse("one of --z or --zgrid is required")),
    }
}

fn ells(args: &LArgs) -> Result<Option<Vec<f64>>, CliError> {
    match (args.l, &args.lgrid) {
        (Some(l), None) if l >= 0.0 => Ok(Some(vec![l])),
        (Some(l), None) => Err(CliError::Validation(format!("length {l} is negative"))),
        (None, Some(g)) => grids::length_grid(g).map(Some),
        _ => Ok(None),
    }
}

fn required_ells(args: &LArgs) -> Result<Vec<f64>, CliError> {
    ells(args)?.ok_or_else(|| CliError::parse("one of --l or --lgrid is required"))
}

fn schur_options(tol: f64, lmax: Option<f64>) -> SchurOptions {
    SchurOptions { l_max: lmax, ..SchurOptions::with_tol(tol) }
}

fn hash(command: &Command, inputs: &[&Input]) -> String {
    let head = format!("{command:?}");
    let mut parts: Vec<&[u8]> = vec![head.as_bytes()];
    parts.extend(inputs.iter().map(|i| i.text.as_bytes()));
    config_hash(&parts)
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn matrix_cells(m: &Mat2) -> Vec<String> {
    m.entries().iter().flat_map(|&e| complex_cells(e)).collect()
}

fn sorted_order(ells: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ells.len()).collect();
    order.sort_by(|&a, &b| ells[a].total_cmp(&ells[b]));
    order
}

fn upper_half_plane(zs: &[Complex64]) -> Result<(), CliError> {
    match zs.iter().find(|z| !(z.im > 0.0)) {
        Some(z) => Err(CliError::Validation(format!("z = {z} is not in the upper half-plane"))),
        None => Ok(()),
    }
}

pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Transfer(a) => {
            let input = Input::load(&a.input)?;
            let (zs, ells) = (zs(&a.z)?, required_ells(&a.l)?);
            let rows = zs
                .par_iter()
                .map(|&z| ells.iter().map(|&l| Ok(transfer(z, input.system(), l)?)).collect())
                .collect::<Result<Vec<Vec<Mat2>>, CliError>>()?;
            let mut columns = vec!["z_re", "z_im", "l"];
            columns.extend(MATRIX_COLUMNS);
            let mut t = Table::new(&hash(command, &[&input]), GRID_UNITS, &columns);
            for (z, row) in zs.iter().zip(&rows) {
                for (&l, m) in ells.iter().zip(row) {
                    let mut cells = complex_cells(*z).to_vec();
                    cells.push(num(l));
                    cells.extend(matrix_cells(m));
                    t.row(&cells);
                }
            }
            Ok(t.into_string())
        }
        Command::Disks(a) => {
            let input = Input::load(&a.input)?;
            let (zs, ells) = (zs(&a.z)?, required_ells(&a.l)?);
            upper_half_plane(&zs)?;
            let order = sorted_order(&ells);
            let rows = zs
                .par_iter()
                .map(|&z| {
                    let mut flow = DiskFlow::new(input.system(), z);
                    let mut disks = vec![None; ells.len()];
                    for &k in &order {
                        flow.advance(ells[k])?;
                        disks[k] = Some(flow.disk());
                    }
                    Ok(disks.into_iter().map(|d| d.expect("every length visited")).collect())
                })
                .collect::<Result<Vec<Vec<_>>, CliError>>()?;
            let columns = ["z_re", "z_im", "l", "center_re", "center_im", "radius"];
            let mut t = Table::new(&hash(command, &[&input]), GRID_UNITS, &columns);
            for (z, row) in zs.iter().zip(&rows) {
                for (&l, d) in ells.iter().zip(row) {
                    let [cr, ci] = complex_cells(d.center);
                    t.row(&[num(z.re), num(z.im), num(l), cr, ci, num(d.radius)]);
                }
            }
            Ok(t.into_string())
        }
        Command::Schur(a) => {
            let input = Input::load(&a.input)?;
            let zs = zs(&a.z)?;
            let opts = schur_options(a.tol, a.lmax);
            let columns = ["z_re", "z_im", "l", "s_re", "s_im", "residual_radius", "l_stop"];
            let mut t = Table::new(&hash(command, &[&input]), GRID_UNITS, &columns);
            if a.minus {
                let left = input.arov(&a.input)?;
                if ells(&a.l)?.is_some_and(|l| l.iter().any(|&l| l != 0.0)) {
                    return Err(CliError::Validation("s- is reported at l = 0 only".into()));
                }
                let values = zs
                    .par_iter()
                    .map(|&z| Ok(schur_minus_with(z, left, &opts)?))
                    .collect::<Result<Vec<_>, CliError>>()?;
                for (z, v) in zs.iter().zip(&values) {
                    let [sr, si] = complex_cells(v.value);
                    t.row(&[num(z.re), num(z.im), num(0.0), sr, si, num(v.residual_radius), num(v.l_stop)]);
                }
                return Ok(t.into_string());
            }
            let ells = ells(&a.l)?.unwrap_or_else(|| vec![0.0]);
            let trace = schur_trace(input.system(), &zs, &ells, &opts)?;
            for ((z, limit), row) in zs.iter().zip(&trace.limits).zip(&trace.values) {
                for (&l, &s) in ells.iter().zip(row) {
                    let [sr, si] = complex_cells(s);
                    t.row(&[num(z.re), num(z.im), num(l), sr, si, num(limit.residual_radius), num(limit.l_stop)]);
                }
            }
            Ok(t.into_string())
        }
        Command::Riccati(a) => {
            let input = Input::load(&a.input)?;
            let p = input.arov(&a.input)?;
            let (zs, ells) = (zs(&a.z)?, required_ells(&a.l)?);
            let s0 = a.s0.as_deref().map(grids::complex).transpose()?;
            let rows = zs
                .par_iter()
                .map(|&z| {
                    let start = match s0 {
                        Some(s) => s,
                        None => schur_plus(z, p, a.tol)?.value,
                    };
                    Ok(riccati_trajectory(z, start, p, &ells, a.step)?)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let columns = ["z_re", "z_im", "l", "mu", "s_re", "s_im", "status"];
            let mut t = Table::new(&hash(command, &[&input]), GRID_UNITS, &columns);
            for (z, states) in zs.iter().zip(&rows) {
                for st in states {
                    let status = match st.status {
                        RiccatiStatus::Valid => "valid",
                        RiccatiStatus::Escaped { .. } => "escaped",
                    };
                    let [sr, si] = complex_cells(st.s);
                    t.row(&[num(z.re), num(z.im), num(st.ell), num(st.mu), sr, si, status.to_string()]);
                }
            }
            Ok(t.into_string())
        }
        Command::Type(a) => {
            let input = Input::load(&a.input)?;
            if !(a.l >= 0.0) {
                return Err(CliError::Validation(format!("length {} is negative", a.l)));
            }
            let report = exponential_type(input.system(), a.l)?;
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["config_hash"] = hash(command, &[&input]).into();
            value["l"] = a.l.into();
            Ok(serde_json::to_string_pretty(&value).expect("report serializes") + "\n")
        }
        Command::Reflectionless(a) => {
            let (left_in, right_in) = (Input::load(&a.left)?, Input::load(&a.right)?);
            let (left, right) = (left_in.arov(&a.left)?, right_in.arov(&a.right)?);
            let xs = grids::x_grid(&a.xgrid)?;
            let eps = grids::list(&a.eps, "eps")?;
            let report = reflectionless_defect(left, right, &xs, &eps, &schur_options(a.tol, a.lmax))?;
            let columns = [
                "eps", "x", "s_plus_re", "s_plus_im", "s_minus_re", "s_minus_im", "defect", "ac", "error",
            ];
            let units = "x = real part of z, eps = imaginary part of z; other columns dimensionless";
            let mut t = Table::new(&hash(command, &[&left_in, &right_in]), units, &columns);
            let opt = |v: Option<Complex64>| v.map_or([String::new(), String::new()], complex_cells);
            for p in &report.points {
                let [pr, pi] = opt(p.s_plus);
                let [mr, mi] = opt(p.s_minus);
                let defect = p.defect.map_or(String::new(), num);
                let error = p.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
                t.row(&[num(p.eps), num(p.x), pr, pi, mr, mi, defect, p.ac.to_string(), error]);
            }
            Ok(t.into_string())
        }
        Command::Bp(a) => {
            let (left_in, right_in) = (Input::load(&a.left)?, Input::load(&a.right)?);
            let full = FullLine::new(left_in.arov(&a.left)?.clone(), right_in.arov(&a.right)?.clone());
            let e = grids::intervals(&a.e)?;
            let (t1, t2) = grids::pair(&a.arc, "arc angle")?;
            let arc = Arc::new(t1, t2)?;
            let ells = required_ells(&a.l)?;
            let report = bp_defect(&full, &e, &arc, &ells, a.xstep, a.eps, &schur_options(a.tol, a.lmax))?;
            let columns = ["l", "defect", "excluded", "nodes", "hypothesis"];
            let units = "l = grid length, defect = integral over x of harmonic-measure differences";
            let mut t = Table::new(&hash(command, &[&left_in, &right_in]), units, &columns);
            for (k, &l) in report.ells.iter().enumerate() {
                t.row(&[
                    num(l),
                    num(report.defects[k]),
                    report.excluded[k].to_string(),
                    report.nodes.to_string(),
                    report.hypothesis[k].to_string(),
                ]);
            }
            Ok(t.into_string())
        }
        Command::Gauge(a) => {
            let input = Input::load(&a.input)?;
            let knots = grids::length_grid(&a.lgrid)?;
            match a.to {
                GaugeTarget::Arov => {
                    let family = TransferFamily::compute(input.system(), &[Complex64::i()], &knots)?;
                    let (arov, _) = to_arov_gauge(&family)?;
                    let rec = recover_parameters(&arov)?;
                    Ok(arov_to_json(&rec.params) + "\n")
                }
                GaugeTarget::Pdb => {
                    let mut zs = zs(&a.z)?;
                    let zero = Complex64::new(0.0, 0.0);
                    if !zs.contains(&zero) {
                        zs.push(zero);
                    }
                    let family = to_pdb_gauge(&TransferFamily::compute(input.system(), &zs, &knots)?)?;
                    let mut columns = vec!["z_re", "z_im", "l"];
                    columns.extend(MATRIX_COLUMNS);
                    let mut t = Table::new(&hash(command, &[&input]), GRID_UNITS, &columns);
                    for (z, row) in family.zs.iter().zip(&family.values) {
                        for (&l, m) in family.knots.iter().zip(row) {
                            let mut cells = complex_cells(*z).to_vec();
                            cells.push(num(l));
                            cells.extend(matrix_cells(m));
                            t.row(&cells);
                        }
                    }
                    Ok(t.into_string())
                }
            }
        }
    }
}
