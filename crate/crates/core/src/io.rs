//! CSV schemas: estimates, panel, and regression inputs; risk-surface,
//! study-result, criterion-curve, and mixture outputs. All files are
//! UTF-8, comma-separated, `.` decimal point, with header rows.

use crate::cv::PanelSample;
use crate::ingest::{IngestError, RawEstimates, RegressionProblem};
use crate::npeb::DiscreteMixture;
use crate::risk::{RiskCurve, RiskSurface};
use crate::simulate::SimResult;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::io::{Read, Write};

fn csv_err(e: impl std::fmt::Display) -> IngestError {
    IngestError::Csv(e.to_string())
}

/// Estimates CSV: columns `id,estimate,std_error`.
pub fn read_estimates<R: Read>(reader: R) -> Result<RawEstimates, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Csv(format!("missing column `{name}`")))
    };
    let (ii, ie, is) = (idx("id")?, idx("estimate")?, idx("std_error")?);
    let mut ids = Vec::new();
    let mut estimates = Vec::new();
    let mut std_errors = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(csv_err)?;
        ids.push(r[ii].to_string());
        estimates.push(r[ie].parse::<f64>().map_err(csv_err)?);
        std_errors.push(r[is].parse::<f64>().map_err(csv_err)?);
    }
    RawEstimates::new(ids, estimates, std_errors)
}

/// Panel CSV: columns `id,rep,value`; every id must carry the complete
/// set of replicates 1..k. Returns the panel plus the unit ids in
/// first-appearance order.
pub fn read_panel<R: Read>(reader: R) -> Result<(PanelSample, Vec<String>), IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Csv(format!("missing column `{name}`")))
    };
    let (ii, ir, iv) = (idx("id")?, idx("rep")?, idx("value")?);
    let mut order = Vec::new();
    let mut by_id: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for record in rdr.records() {
        let r = record.map_err(csv_err)?;
        let id = r[ii].to_string();
        let rep: u64 = r[ir].parse().map_err(csv_err)?;
        let value: f64 = r[iv].parse().map_err(csv_err)?;
        if !by_id.contains_key(&id) {
            order.push(id.clone());
        }
        if by_id.entry(id.clone()).or_default().insert(rep, value).is_some() {
            return Err(IngestError::Csv(format!("duplicate (id, rep) = ({id}, {rep})")));
        }
    }
    if order.is_empty() {
        return Err(IngestError::Csv("panel file has no rows".into()));
    }
    let k = by_id[&order[0]].len();
    let expected: Vec<u64> = (1..=k as u64).collect();
    let mut rows = Vec::with_capacity(order.len());
    for id in &order {
        let reps = &by_id[id];
        let seen: Vec<u64> = reps.keys().cloned().collect();
        if seen != expected {
            return Err(IngestError::Csv(format!(
                "id {id} must have replicates 1..{k}, got {seen:?}"
            )));
        }
        rows.push(reps.values().cloned().collect());
    }
    Ok((PanelSample::new(rows)?, order))
}

/// Regression CSV: first column `y`, remaining columns are regressors;
/// header row required.
pub fn read_regression<R: Read>(reader: R) -> Result<RegressionProblem, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("y") {
        return Err(IngestError::Csv("first column must be `y`".into()));
    }
    let n_regressors = headers.len() - 1;
    if n_regressors == 0 {
        return Err(IngestError::Csv("regression file needs at least one regressor".into()));
    }
    let mut y = Vec::new();
    let mut w = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(csv_err)?;
        y.push(r[0].parse::<f64>().map_err(csv_err)?);
        for j in 1..headers.len() {
            w.push(r[j].parse::<f64>().map_err(csv_err)?);
        }
    }
    let rows = y.len();
    Ok(RegressionProblem {
        design: DMatrix::from_row_slice(rows, n_regressors, &w),
        outcome: DVector::from_vec(y),
    })
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.12}")
    }
}

/// RiskSurface CSV: `p,mu0,sigma0,risk_ridge,risk_lasso,risk_pretest,
/// lambda_ridge,lambda_lasso,lambda_pretest,best`.
pub fn write_surface<W: Write>(mut w: W, surface: &RiskSurface) -> std::io::Result<()> {
    writeln!(
        w,
        "p,mu0,sigma0,risk_ridge,risk_lasso,risk_pretest,lambda_ridge,lambda_lasso,lambda_pretest,best"
    )?;
    for row in &surface.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            row.dgp.p,
            row.dgp.mu0,
            row.dgp.sigma0,
            fmt(row.risk[0]),
            fmt(row.risk[1]),
            fmt(row.risk[2]),
            fmt(row.lambda[0].lambda()),
            fmt(row.lambda[1].lambda()),
            fmt(row.lambda[2].lambda()),
            row.best.label()
        )?;
    }
    Ok(())
}

/// SimResult CSV: `p,mu0,sigma0,n,estimator,selector,mean_loss,se,mean_lambda`.
pub fn write_sim_result<W: Write>(mut w: W, result: &SimResult) -> std::io::Result<()> {
    writeln!(w, "p,mu0,sigma0,n,estimator,selector,mean_loss,se,mean_lambda")?;
    for c in &result.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.dgp.p,
            c.dgp.mu0,
            c.dgp.sigma0,
            c.n,
            c.estimator,
            c.selector,
            fmt(c.mean_loss),
            fmt(c.se),
            fmt(c.mean_lambda)
        )?;
    }
    Ok(())
}

/// Criterion-curve CSV: `lambda,t,<prefix>_<label>...`; NaN for absent
/// values. `prefix` names the criterion, e.g. `sure` or `cv`.
pub fn write_curve<W: Write>(mut w: W, curves: &[&RiskCurve], prefix: &str) -> std::io::Result<()> {
    assert!(!curves.is_empty());
    let lambdas = &curves[0].lambdas;
    let mut header = String::from("lambda,t");
    for c in curves {
        for l in &c.labels {
            header.push(',');
            header.push_str(prefix);
            header.push('_');
            header.push_str(l);
        }
    }
    writeln!(w, "{header}")?;
    for (i, l) in lambdas.iter().enumerate() {
        let mut line = format!("{},{}", fmt(l.lambda()), fmt(l.t()));
        for c in curves {
            for j in 0..c.labels.len() {
                line.push(',');
                let v = if i < c.values.len() { c.values[i][j] } else { f64::NAN };
                line.push_str(&fmt(v));
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Mixture CSV: `support,weight`.
pub fn write_mixture<W: Write>(mut w: W, mix: &DiscreteMixture) -> std::io::Result<()> {
    writeln!(w, "support,weight")?;
    for (u, wt) in mix.support().iter().zip(mix.weights()) {
        writeln!(w, "{},{}", fmt(*u), fmt(*wt))?;
    }
    Ok(())
}

/// Shrinkage-function CSV: `x,m_hat` over a 512-point grid spanning the
/// mixture support.
pub fn write_shrinkage_grid<W: Write>(mut w: W, mix: &DiscreteMixture) -> std::io::Result<()> {
    writeln!(w, "x,m_hat")?;
    let lo = mix.support()[0];
    let hi = *mix.support().last().unwrap();
    for i in 0..512 {
        let x = lo + (hi - lo) * i as f64 / 511.0;
        writeln!(w, "{},{}", fmt(x), fmt(mix.posterior_mean(x)))?;
    }
    Ok(())
}
