//! Plain-text renderings of point sets: CSV rows and an SVG polyline.

use std::fmt::Write;

use crate::regions::ErrorPoint;

/// Significant digits used for every printed number.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant digits. Non-finite values pass
/// through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of `x` rounded to 12 significant digits; `inf`,
/// `-inf` and `nan` for non-finite values.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round_sig(x);
        // avoid printing negative zero
        if r == 0.0 {
            "0".into()
        } else if r.abs() < 1e-5 || r.abs() >= 1e15 {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

/// CSV with header `pfa,pmd` (plus `inside` when flags are given) and one
/// row per point. No trailing newline.
///
/// ```
/// use divkit::regions::ErrorPoint;
/// use divkit::table::emit_csv;
///
/// let csv = emit_csv(&[ErrorPoint { pfa: 0.0, pmd: 1.0 }], None);
/// assert_eq!(csv, "pfa,pmd\n0,1");
/// ```
pub fn emit_csv(points: &[ErrorPoint], inside: Option<&[bool]>) -> String {
    let mut out = String::from(if inside.is_some() {
        "pfa,pmd,inside"
    } else {
        "pfa,pmd"
    });
    for (i, p) in points.iter().enumerate() {
        write!(out, "\n{},{}", format_sig(p.pfa), format_sig(p.pmd)).expect("write to string");
        if let Some(flags) = inside {
            write!(out, ",{}", flags.get(i).copied().unwrap_or(false)).expect("write to string");
        }
    }
    out
}

const SVG_SIZE: f64 = 600.0;

/// A 600×600 SVG of the unit square with `boundary` drawn as a polyline,
/// its mirror `(1−x, 1−y)` as a second polyline, and `points` as dots.
pub fn emit_svg(boundary: &[ErrorPoint], points: &[ErrorPoint]) -> String {
    let to_px = |p: &ErrorPoint| (p.pfa * SVG_SIZE, (1.0 - p.pmd) * SVG_SIZE);
    let polyline = |pts: &mut dyn Iterator<Item = ErrorPoint>| {
        let mut s = String::new();
        for p in pts {
            let (x, y) = to_px(&p);
            if !s.is_empty() {
                s.push(' ');
            }
            write!(s, "{},{}", format_sig(x), format_sig(y)).expect("write to string");
        }
        s
    };
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600">"#
    )
    .expect("write to string");
    out.push_str(
        "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\" stroke=\"black\"/>\n",
    );
    out.push_str("<line x1=\"0\" y1=\"0\" x2=\"600\" y2=\"600\" stroke=\"#bbbbbb\"/>\n");
    if !boundary.is_empty() {
        let lower = polyline(&mut boundary.iter().copied());
        let upper = polyline(&mut boundary.iter().map(|p| p.negated()));
        writeln!(
            out,
            "<polyline points=\"{lower}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>"
        )
        .expect("write to string");
        writeln!(
            out,
            "<polyline points=\"{upper}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>"
        )
        .expect("write to string");
    }
    for p in points {
        let (x, y) = to_px(p);
        writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"#d62728\"/>",
            format_sig(x),
            format_sig(y)
        )
        .expect("write to string");
    }
    out.push_str("</svg>\n");
    out
}
