//! Hand-emitted SVG line plots: fixed dimensions, no timestamps, values
//! formatted the same way every run.

use wpgeom::Error;

const W: f64 = 800.0;
const H: f64 = 500.0;
const MARGIN: f64 = 60.0;

/// Plots `column` against `log_inv_r` when present (falling back to the row
/// index), returning the SVG document.
pub fn plot_column(csv: &str, column: &str, log_axis: bool) -> Result<String, Error> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?
        .split(',')
        .collect();
    let col = header
        .iter()
        .position(|&h| h == column)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "column '{column}' not found; available: {}",
                header.join(", ")
            ))
        })?;
    let xcol = header.iter().position(|&h| h == "log_inv_r");

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let y: f64 = fields
            .get(col)
            .ok_or_else(|| Error::InvalidInput(format!("row {i} too short")))?
            .parse()
            .map_err(|e| Error::InvalidInput(format!("row {i}: {e}")))?;
        let x = match xcol {
            Some(c) => fields
                .get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .unwrap_or(i as f64),
            None => i as f64,
        };
        xs.push(x);
        ys.push(if log_axis { y.abs().max(1e-300).log10() } else { y });
    }
    if ys.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 rows to plot a line".into(),
        ));
    }

    let (xmin, xmax) = bounds(&xs);
    let (ymin, ymax) = bounds(&ys);
    let sx = |x: f64| MARGIN + (x - xmin) / (xmax - xmin).max(1e-300) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - ymin) / (ymax - ymin).max(1e-300) * (H - 2.0 * MARGIN);

    let mut path = String::new();
    for (i, (&x, &y)) in xs.iter().zip(ys.iter()).enumerate() {
        path.push_str(if i == 0 { "M" } else { " L" });
        path.push_str(&format!("{:.2},{:.2}", sx(x), sy(y)));
    }

    let ylabel = if log_axis {
        format!("log10 |{column}|")
    } else {
        column.to_string()
    };
    let xlabel = if xcol.is_some() { "log(1/r)" } else { "index" };

    let mut ticks = String::new();
    for k in 0..=4 {
        let ty = ymin + (ymax - ymin) * k as f64 / 4.0;
        let tx = xmin + (xmax - xmin) * k as f64 / 4.0;
        ticks.push_str(&format!(
            "<line x1=\"{m:.1}\" y1=\"{y:.2}\" x2=\"{w:.1}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n\
             <text x=\"6\" y=\"{y:.2}\" font-size=\"11\">{tyv:.6e}</text>\n\
             <line x1=\"{x:.2}\" y1=\"{m:.1}\" x2=\"{x:.2}\" y2=\"{h:.1}\" stroke=\"#eee\"/>\n\
             <text x=\"{x:.2}\" y=\"{hh:.1}\" font-size=\"11\" text-anchor=\"middle\">{txv:.4}</text>\n",
            m = MARGIN,
            w = W - MARGIN,
            h = H - MARGIN,
            hh = H - MARGIN / 2.0,
            y = sy(ty),
            x = sx(tx),
            tyv = ty,
            txv = tx,
        ));
    }

    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         {ticks}\
         <rect x=\"{m}\" y=\"{m}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"black\"/>\n\
         <path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n\
         <text x=\"{cx}\" y=\"{ly}\" font-size=\"13\" text-anchor=\"middle\">{xlabel}</text>\n\
         <text x=\"{cx}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">{ylabel}</text>\n\
         </svg>\n",
        m = MARGIN,
        iw = W - 2.0 * MARGIN,
        ih = H - 2.0 * MARGIN,
        cx = W / 2.0,
        ly = H - 12.0,
    ))
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}
