//! Plot data derived from a report. Only data is produced, no rendering.
//!
//! | file                   | columns                          |
//! |------------------------|----------------------------------|
//! | `tail_curves.csv`      | `xi,n,tail_mass`                 |
//! | `certified_bounds.csv` | `xi,level,lower,upper`           |
//! | `phi_hat.csv`          | `x,phi_hat_sq` on `[−4, 4]`      |
//! | `tile_points.csv`      | `x1,…,xd` (written by `tile`)    |
//!
//! `tail_mass` at row `n` is `P_ξ^{N_max}({k : msb(k) ≥ n})`; `phi_hat_sq` is the
//! truncated product with `J_max` factors.

use lowpass_core::measure::phi_hat_sq;
use lowpass_core::numeric::ProductMode;

use crate::report::{num, CsvTable, Report, XiKey};

/// Samples per unit length of the `|φ̂|²` curve.
pub const PHI_HAT_DENSITY: i32 = 100;
pub const PHI_HAT_HALF_WIDTH: i32 = 4;

pub fn xi_label(xi: &Option<XiKey>) -> String {
    match xi {
        Some(XiKey::Scalar(p)) => p.to_string(),
        Some(XiKey::Vector(v)) => v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "),
        None => String::new(),
    }
}

pub fn tail_tables(report: &Report) -> (CsvTable, CsvTable) {
    let mut tails = CsvTable::new("tail_curves", &["xi", "n", "tail_mass"]);
    let mut bounds = CsvTable::new("certified_bounds", &["xi", "level", "lower", "upper"]);
    for e in &report.per_xi {
        let label = xi_label(&e.xi);
        for (n, t) in e.tail_curve.iter().flatten().enumerate() {
            tails.push([label.clone(), n.to_string(), num(*t)]);
        }
        for b in e.certified.iter().flatten() {
            bounds.push([label.clone(), b.level.to_string(), num(b.lower), num(b.upper)]);
        }
    }
    (tails, bounds)
}

/// `|φ̂|²` on `[−4, 4]` for the report's scalar filter; headers only when the
/// report has no scalar filter or no sampled frequencies.
pub fn phi_hat_table(report: &Report) -> CsvTable {
    let mut t = CsvTable::new("phi_hat", &["x", "phi_hat_sq"]);
    if report.per_xi.is_empty() {
        return t;
    }
    let Some(filter) = report.filter.as_ref().and_then(|f| f.definition.build().ok()) else {
        return t;
    };
    let n = PHI_HAT_DENSITY * PHI_HAT_HALF_WIDTH;
    for i in -n..=n {
        let x = f64::from(i) / f64::from(PHI_HAT_DENSITY);
        let v = phi_hat_sq(&filter, x, report.config.j_max, ProductMode::Compensated);
        t.push([num(x), num(v)]);
    }
    t
}

pub fn emit_plot_data(report: &Report) -> Vec<CsvTable> {
    let (tails, bounds) = tail_tables(report);
    vec![tails, bounds, phi_hat_table(report)]
}
