//! Deterministic CSV emission: fixed column order, 17 significant digits,
//! no timestamps, so identical inputs give identical bytes.

use num_complex::Complex64;

use wpgeom::dim1::yukawa_chain;
use wpgeom::hodge::hodge_riemann_report;
use wpgeom::hodge_metric::{domination_constant, hodge_metric_direct};
use wpgeom::models::{decomposition_at, Model};
use wpgeom::partial::{ph_at_point, scalar_curvature};
use wpgeom::verify::{lemma_suite, FdConfig};
use wpgeom::wp::{covariant_frame, wp_curvature, wp_metric, wp_ricci};
use wpgeom::{Error, Tolerances};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// raw numeric values for post-processing (same shape as rows)
    pub values: Vec<Vec<f64>>,
    pub pass_flags: Vec<bool>,
}

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.pass_flags.iter().all(|&b| b)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Whether the column's values change sign along the sweep.
    pub fn sign_change_column(&self, name: &str) -> Option<bool> {
        let idx = self.column_index(name)?;
        let vals: Vec<f64> = self.values.iter().map(|r| r[idx]).collect();
        let has_pos = vals.iter().any(|&v| v > 0.0);
        let has_neg = vals.iter().any(|&v| v < 0.0);
        Some(has_pos && has_neg)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_table(
    model: &Model,
    points: &[Vec<Complex64>],
    wp: bool,
    ph: Option<Option<f64>>,
    hodge: bool,
    dim1: bool,
    suites: bool,
    tol: &Tolerances,
) -> Result<Table, Error> {
    let m = model.vars();
    if m != 1 {
        return Err(Error::InvalidInput(
            "sweeps are wired for one-parameter models; use the library API for m > 1".into(),
        ));
    }
    let mut header = vec![
        "re_z".to_string(),
        "im_z".to_string(),
        "r".to_string(),
        "log_inv_r".to_string(),
        "hr_pass".to_string(),
    ];
    if wp {
        header.extend(
            ["wp_g", "wp_r1111", "wp_sec", "wp_ric", "wp_pd"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    if ph.is_some() {
        header.extend(
            ["ph_mu", "ph_h", "ph_rt1111", "ph_sec", "ph_scalar"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    if hodge {
        header.extend(["hodge_h", "hodge_dom_c"].iter().map(|s| s.to_string()));
    }
    if dim1 {
        header.extend(
            ["f111_abs", "f1111_abs", "a_cap", "dim1_rho"]
                .iter()
                .map(|s| s.to_string()),
        );
    }
    if suites {
        header.push("suite_pass".to_string());
    }

    let mut rows = Vec::new();
    let mut values = Vec::new();
    let mut pass_flags = Vec::new();
    let cfg = FdConfig::default();
    for z in points {
        let mut val_row: Vec<f64> = Vec::new();
        let z0 = z[0];
        let r = z0.norm();
        val_row.push(z0.re);
        val_row.push(z0.im);
        val_row.push(r);
        val_row.push((1.0 / r).ln());

        let mut point_pass = true;
        let jet = model.jet(z, 3)?;
        let dec = decomposition_at(&jet, model.polarization(), tol)?;
        let hr = hodge_riemann_report(&dec, model.polarization(), tol)?;
        point_pass &= hr.pass();
        val_row.push(if hr.pass() { 1.0 } else { 0.0 });

        if wp {
            let g = wp_metric(&jet, model.polarization(), tol)?;
            let frame = covariant_frame(&jet, model.polarization(), tol)?;
            let rc = wp_curvature(&frame, &g, model.polarization());
            let ric = wp_ricci(&rc, &g, tol)?;
            let gv = g.matrix[(0, 0)].re;
            let r1111 = rc.tensor.at(0, 0, 0, 0).re;
            val_row.push(gv);
            val_row.push(r1111);
            val_row.push(r1111 / (gv * gv));
            val_row.push(ric[(0, 0)].re);
            let pd = g.min_eigenvalue() > 0.0;
            point_pass &= pd;
            val_row.push(if pd { 1.0 } else { 0.0 });
        }
        if let Some(mu_opt) = ph {
            match ph_at_point(model, z, mu_opt, tol) {
                Ok(pt) => {
                    let hv = pt.h.matrix[(0, 0)].re;
                    let rt = pt.curvature.tensor.at(0, 0, 0, 0).re;
                    let mu_used = match pt.h.role {
                        wpgeom::wp::MetricRole::PartialHodge { mu } => mu,
                        _ => f64::NAN,
                    };
                    val_row.push(mu_used);
                    val_row.push(hv);
                    val_row.push(rt);
                    val_row.push(rt / (hv * hv));
                    val_row.push(scalar_curvature(&pt.curvature, &pt.h, tol)?);
                }
                Err(e) => return Err(e),
            }
        }
        if hodge {
            let order = (model.weight() as usize).min(4);
            let jet_h = model.jet(z, order)?;
            let dec_h = decomposition_at(&jet_h, model.polarization(), tol)?;
            let hh = hodge_metric_direct(&jet_h, &dec_h, model.polarization(), tol)?;
            let g = wp_metric(&jet, model.polarization(), tol)?;
            val_row.push(hh.matrix[(0, 0)].re);
            val_row.push(domination_constant(&g.matrix, &hh.matrix)?);
        }
        if dim1 {
            let jet4 = model.jet(z, 4)?;
            let ch = yukawa_chain(&jet4, model.polarization(), tol)?;
            val_row.push(ch.f111.norm());
            val_row.push(ch.f1111.norm());
            val_row.push(ch.a_cap);
            val_row.push(ch.rho);
        }
        if suites {
            let rep = lemma_suite(model, std::slice::from_ref(z), &cfg, tol)?;
            point_pass &= rep.pass();
            val_row.push(if rep.pass() { 1.0 } else { 0.0 });
        }
        rows.push(val_row.iter().map(|&v| fmt(v)).collect());
        values.push(val_row);
        pass_flags.push(point_pass);
    }
    Ok(Table {
        header,
        rows,
        values,
        pass_flags,
    })
}
