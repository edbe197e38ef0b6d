use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use super::metrics::TrajectoryRow;
use crate::error::Error;
use crate::traffic::{SignalColor, SignalProgram, VehicleClass};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

fn colour_name(c: SignalColor) -> &'static str {
    match c {
        SignalColor::Green => "green",
        SignalColor::Yellow => "yellow",
        SignalColor::Red => "red",
    }
}

/// Approach signal bands as CSV: `start_s,end_s,color`.
pub fn write_bands_csv<W: Write>(bands: &[(f64, f64, SignalColor)], mut out: W) -> Result<(), Error> {
    writeln!(out, "start_s,end_s,color")?;
    for (a, b, c) in bands {
        writeln!(out, "{a},{b},{}", colour_name(*c))?;
    }
    Ok(())
}

/// Time–space diagram of a trajectory log with the approach signal drawn
/// as coloured bands along the stop line.
pub fn time_space_svg(rows: &[TrajectoryRow], program: &SignalProgram, lane_length: f64, title: &str) -> String {
    let t_min = rows.iter().map(|r| r.time_s).fold(f64::INFINITY, f64::min);
    let t_max = rows.iter().map(|r| r.time_s).fold(f64::NEG_INFINITY, f64::max);
    let (t_min, t_max) = if t_min.is_finite() && t_max > t_min { (t_min, t_max) } else { (0.0, 1.0) };
    let y_min = rows.iter().map(|r| r.position_m).fold(0.0, f64::min);
    let y_max = lane_length * 1.05;

    let sx = |t: f64| MARGIN + (t - t_min) / (t_max - t_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |x: f64| HEIGHT - MARGIN - (x - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="25" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{b}" x2="{m}" y2="{m}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">time (s): {t_min:.0} to {t_max:.0}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">position (m)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (a, b, c) in program.approach_bands(t_min, t_max) {
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="6"/>"#,
            sx(a),
            sx(b),
            colour_name(c),
            y = sy(lane_length)
        );
    }

    let mut traces: BTreeMap<u32, (String, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in rows {
        let e = traces.entry(r.vehicle_id).or_insert_with(|| (r.class.clone(), Vec::new()));
        e.1.push((r.time_s, r.position_m));
    }
    for (class, pts) in traces.values() {
        let (stroke, width) = match VehicleClass::parse(class) {
            Some(VehicleClass::EgoCav) => ("#d62728", 2.0),
            Some(VehicleClass::PlatoonHdv) => ("#1f77b4", 1.5),
            _ => ("#aaaaaa", 1.0),
        };
        let points: Vec<String> = pts
            .iter()
            .map(|&(t, x)| format!("{:.2},{:.2}", sx(t), sy(x.min(y_max))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="{width}" points="{}"/>"#,
            points.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_bands_and_traces() {
        let rows: Vec<TrajectoryRow> = (0..50)
            .map(|t| TrajectoryRow {
                time_s: t as f64,
                vehicle_id: 0,
                class: "ego_cav".into(),
                position_m: 10.0 * t as f64,
                speed_mps: 10.0,
                accel_mps2: 0.0,
                energy_wh: 0.0,
                signal_phase: 0,
                signal_remaining_s: 1.0,
            })
            .collect();
        let p = SignalProgram::fixed_cycle(&[30.0; 4], 3.0, 0.0, 0).unwrap();
        let svg = time_space_svg(&rows, &p, 500.0, "test");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"stroke="green""#));
        assert!(svg.contains(r#"stroke="yellow""#));
        assert!(svg.contains(r#"stroke="red""#));
        assert!(svg.contains("#d62728"));
    }

    #[test]
    fn bands_csv() {
        let mut out = Vec::new();
        write_bands_csv(&[(0.0, 30.0, SignalColor::Green)], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "start_s,end_s,color\n0,30,green\n");
    }
}
