//! Conversion of engine and experiment results into CSV tables.

use super::table::{Cell, Schema, Table};
use crate::error::{Error, Result};
use crate::exact::{DerivativeCheck, ExactResult};
use crate::experiments::{
    ConcentrationFit, ExpMomentReport, Figure1Data, HopfieldSteinReport, InterpolationScan, ResidualTable, SteinCheck,
    TailFit,
};
use crate::mc::ThermoIntegration;
use crate::model::{CouplingMatrix, Disorder, Hamiltonian, ModelParams, PatternMatrix};
use crate::patterns::PatternDistribution;

fn params_cells(p: &ModelParams, which: Hamiltonian) -> Vec<Cell> {
    vec![
        p.n.into(),
        p.m.into(),
        p.alpha().into(),
        p.beta.into(),
        p.field.into(),
        p.dist.to_string().into(),
        which.to_string().into(),
    ]
}

pub fn exact_table(r: &ExactResult) -> Result<Table> {
    let mut t = Table::new(Schema::Exact);
    let mut row = params_cells(&r.params, r.which);
    row.extend([r.log_z.into(), r.free_energy.into()]);
    t.push(row)?;
    Ok(t)
}

/// Summary row and per-node table of a thermodynamic-integration run.
pub fn mc_tables(ti: &ThermoIntegration, p: &ModelParams, which: Hamiltonian) -> Result<(Table, Table)> {
    let mut summary = Table::new(Schema::Mc);
    let (burn_in, sweeps, warning) = ti
        .run
        .as_ref()
        .map_or((0, 0, false), |r| (r.burn_in, r.estimates[0][0].n_samples, r.swap_warning));
    let mut row = params_cells(p, which);
    row.extend([
        ti.estimate.mean.into(),
        ti.estimate.std_error.into(),
        ti.statistical_error.into(),
        ti.truncation_error.into(),
        burn_in.into(),
        sweeps.into(),
        warning.into(),
    ]);
    summary.push(row)?;

    let mut nodes = Table::new(Schema::McNodes);
    for (k, e) in ti.integrand.iter().enumerate() {
        let swap = ti
            .run
            .as_ref()
            .and_then(|r| r.swap_acceptance.get(k).copied())
            .unwrap_or(f64::NAN);
        nodes.push(vec![k.into(), ti.ladder[k].into(), e.mean.into(), e.std_error.into(), swap.into()])?;
    }
    Ok((summary, nodes))
}

pub fn theorem1_table(r: &ResidualTable) -> Result<Table> {
    let mut t = Table::new(Schema::Theorem1);
    for row in &r.rows {
        t.push(vec![
            row.alpha.into(),
            row.f_hop.mean.into(),
            row.f_hop.std_error.into(),
            row.f_sk.mean.into(),
            row.f_sk.std_error.into(),
            row.residual.mean.into(),
            row.residual.std_error.into(),
            r.n_disorder.into(),
            r.beta.into(),
            r.field.into(),
            r.n.into(),
            row.m.into(),
        ])?;
    }
    Ok(t)
}

pub fn figure1_table(d: &Figure1Data) -> Result<Table> {
    let mut t = Table::new(Schema::Figure1);
    for panel in &d.panels {
        for pt in &panel.points {
            t.push(vec![
                panel.beta.into(),
                panel.field.into(),
                pt.alpha.into(),
                pt.m.into(),
                pt.f_hop.mean.into(),
                pt.f_hop.std_error.into(),
                pt.curve.into(),
                panel.p_hat.mean.into(),
                panel.p_hat.std_error.into(),
                pt.residual.mean.into(),
                pt.residual.std_error.into(),
                pt.f_hop.n_samples.into(),
                panel.p_hat.n_samples.into(),
            ])?;
        }
    }
    Ok(t)
}

pub fn tail_table(f: &TailFit) -> Result<Table> {
    let mut t = Table::new(Schema::OverlapTail);
    for (r, e) in f.r.iter().zip(&f.tail) {
        t.push(vec![(*r).into(), e.mean.into(), e.std_error.into(), f.n_disorder.into()])?;
    }
    Ok(t)
}

pub fn exp_moment_table(r: &ExpMomentReport, alpha: f64, beta: f64) -> Result<Table> {
    let mut t = Table::new(Schema::ExpMoment);
    for row in &r.rows {
        t.push(vec![
            row.n.into(),
            row.m.into(),
            alpha.into(),
            beta.into(),
            r.c.into(),
            row.value.mean.into(),
            row.value.std_error.into(),
            row.value.n_samples.into(),
        ])?;
    }
    Ok(t)
}

pub fn interpolation_table(s: &InterpolationScan) -> Result<Table> {
    let mut t = Table::new(Schema::Interpolate);
    for row in &s.rows {
        t.push(vec![row.t.into(), row.f_t.mean.into(), row.f_t.std_error.into(), row.f_t.n_samples.into()])?;
    }
    Ok(t)
}

pub fn stein_table(checks: &[SteinCheck]) -> Result<Table> {
    let mut t = Table::new(Schema::Stein);
    for c in checks {
        t.push(vec![
            c.t.into(),
            c.lhs.mean.into(),
            c.lhs.std_error.into(),
            c.rhs.mean.into(),
            c.rhs.std_error.into(),
            c.difference.mean.into(),
            c.difference.std_error.into(),
            c.lhs.n_samples.into(),
        ])?;
    }
    Ok(t)
}

pub fn hopfield_stein_table(r: &HopfieldSteinReport) -> Result<Table> {
    let mut t = Table::new(Schema::HopfieldStein);
    for row in &r.rows {
        t.push(vec![
            row.m.into(),
            row.lhs.mean.into(),
            row.lhs.std_error.into(),
            row.first_term.mean.into(),
            row.first_term.std_error.into(),
            row.remainder.mean.into(),
            row.remainder.std_error.into(),
            row.scaled_remainder.mean.into(),
            row.scaled_remainder.std_error.into(),
            row.lhs.n_samples.into(),
        ])?;
    }
    Ok(t)
}

/// One row per derivative check: `(kind, t, site, check)`.
pub fn diffrule_table(rows: &[(String, f64, usize, DerivativeCheck)]) -> Result<Table> {
    let mut t = Table::new(Schema::Diffrule);
    for (kind, tt, site, c) in rows {
        t.push(vec![
            kind.clone().into(),
            (*tt).into(),
            (*site).into(),
            c.analytic.into(),
            c.finite_diff.into(),
            c.step.into(),
        ])?;
    }
    Ok(t)
}

pub fn concentration_table(f: &ConcentrationFit) -> Result<Table> {
    let mut t = Table::new(Schema::Concentration);
    for row in &f.rows {
        t.push(vec![
            row.n.into(),
            row.m.into(),
            row.mean_f.into(),
            row.moment.mean.into(),
            row.moment.std_error.into(),
            f.d.into(),
            row.moment.n_samples.into(),
        ])?;
    }
    Ok(t)
}

/// Disorder as `(kind, row, col, value)` records: `xi` entries are (pattern,
/// site), `J` entries are (i, j).
pub fn disorder_table(d: &Disorder) -> Result<Table> {
    let mut t = Table::new(Schema::Disorder);
    if let Some(xi) = &d.patterns {
        for k in 0..xi.m() {
            for i in 0..xi.n() {
                t.push(vec!["xi".into(), k.into(), i.into(), xi.get(k, i).into()])?;
            }
        }
    }
    if let Some(j) = &d.couplings {
        for a in 0..j.n() {
            for b in 0..j.n() {
                t.push(vec!["J".into(), a.into(), b.into(), j.get(a, b).into()])?;
            }
        }
    }
    Ok(t)
}

/// Inverse of [`disorder_table`]; the pattern tag is given by the caller
/// because the file only stores values.
pub fn disorder_from_table(t: &Table, dist: PatternDistribution) -> Result<Disorder> {
    if t.schema != Schema::Disorder {
        return Err(Error::Schema(format!("expected a disorder table, got {}", t.schema)));
    }
    let mut xi: Vec<(usize, usize, f64)> = Vec::new();
    let mut j: Vec<(usize, usize, f64)> = Vec::new();
    for row in &t.rows {
        let (Cell::Text(kind), Cell::Int(r), Cell::Int(c), Cell::Float(v)) = (&row[0], &row[1], &row[2], &row[3]) else {
            unreachable!("rows are schema-checked");
        };
        let (r, c) = (usize::try_from(*r), usize::try_from(*c));
        let (Ok(r), Ok(c)) = (r, c) else {
            return Err(Error::Schema("negative index in disorder table".into()));
        };
        match kind.as_str() {
            "xi" => xi.push((r, c, *v)),
            "J" => j.push((r, c, *v)),
            other => return Err(Error::Schema(format!("unknown disorder kind '{other}'"))),
        }
    }
    let dense = |entries: &[(usize, usize, f64)], rows: usize, cols: usize| -> Result<Vec<f64>> {
        if entries.len() != rows * cols {
            return Err(Error::Schema(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                entries.len()
            )));
        }
        let mut out = vec![f64::NAN; rows * cols];
        for &(r, c, v) in entries {
            if r >= rows || c >= cols || !out[r * cols + c].is_nan() {
                return Err(Error::Schema(format!("bad or repeated index ({r}, {c})")));
            }
            out[r * cols + c] = v;
        }
        Ok(out)
    };
    let patterns = if xi.is_empty() {
        None
    } else {
        let m = xi.iter().map(|e| e.0).max().unwrap() + 1;
        let n = xi.iter().map(|e| e.1).max().unwrap() + 1;
        Some(PatternMatrix::new(n, m, dense(&xi, m, n)?, dist)?)
    };
    let couplings = if j.is_empty() {
        None
    } else {
        let n = j.iter().map(|e| e.0.max(e.1)).max().unwrap() + 1;
        Some(CouplingMatrix::new(n, dense(&j, n, n)?)?)
    };
    Ok(Disorder { patterns, couplings })
}
