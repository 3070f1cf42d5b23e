use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ProjectionResult;

/// CSV with header `id,group,x,y,cluster`. Empty fields for missing values.
pub fn write_csv(result: &ProjectionResult) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "group", "x", "y", "cluster"])?;
    for (i, p) in result.points.iter().enumerate() {
        let cluster = result
            .cluster
            .as_ref()
            .and_then(|c| c.get(i))
            .map(|c| c.to_string())
            .unwrap_or_default();
        w.write_record([
            p.id.as_str(),
            p.group.as_deref().unwrap_or(""),
            &p.x.to_string(),
            &p.y.to_string(),
            &cluster,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];
const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// A self-contained SVG scatter. Points are colored by cluster when present,
/// otherwise by group.
pub fn scatter_svg(result: &ProjectionResult) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &result.points {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let (sx, sy) = (span(xmin, xmax), span(ymin, ymax));
    let inner = SIZE - 2.0 * MARGIN;

    let groups: BTreeMap<&str, usize> = result
        .points
        .iter()
        .filter_map(|p| p.group.as_deref())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (i, p) in result.points.iter().enumerate() {
        let cx = MARGIN + (p.x - xmin) / sx * inner;
        let cy = SIZE - MARGIN - (p.y - ymin) / sy * inner;
        let slot = match &result.cluster {
            Some(c) => c.get(i).copied().unwrap_or(0),
            None => p
                .group
                .as_deref()
                .and_then(|g| groups.get(g).copied())
                .unwrap_or(0),
        };
        let _ = writeln!(
            out,
            "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"4\" fill=\"{}\"><title>{}</title></circle>",
            PALETTE[slot % PALETTE.len()],
            escape(&p.id)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::ProjectedPoint;

    fn result() -> ProjectionResult {
        ProjectionResult {
            points: vec![
                ProjectedPoint {
                    id: "q0".into(),
                    group: Some("count".into()),
                    x: 0.5,
                    y: -1.0,
                },
                ProjectedPoint {
                    id: "q,1".into(),
                    group: None,
                    x: 2.0,
                    y: 3.0,
                },
            ],
            cluster: Some(vec![1, 0]),
            stress: 0.0,
        }
    }

    #[test]
    fn csv_layout() {
        let csv = write_csv(&result()).unwrap();
        assert_eq!(csv, "id,group,x,y,cluster\nq0,count,0.5,-1,1\n\"q,1\",,2,3,0\n");
    }

    #[test]
    fn svg_has_one_circle_per_point() {
        let svg = scatter_svg(&result());
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.starts_with("<svg"));
    }
}
