//! CSV and SVG writers. Floats use Rust's shortest round-trip `Display`.

use std::fmt::Write as _;

use arrowlab_core::scenario::EntropyRow;

/// Builds a CSV document with `\n` line endings. Fields are never quoted,
/// so callers must not pass commas or newlines.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn with_header(columns: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.row(columns.iter().map(|c| c.to_string()));
        csv
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for field in fields {
            if !first {
                self.text.push(',');
            }
            let field = field.as_ref();
            debug_assert!(
                !field.contains([',', '\n']),
                "unquotable CSV field {field:?}"
            );
            self.text.push_str(field);
            first = false;
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serialises to JSON");
    bytes.push(b'\n');
    bytes
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// One polyline per p value, s on the x axis and Z^b on the y axis.
pub fn entropy_svg(rows: &[EntropyRow]) -> String {
    let mut curves: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for row in rows {
        match curves.last_mut() {
            Some((p, points)) if *p == row.p => points.push((row.s, row.z_b)),
            _ => curves.push((row.p, vec![(row.s, row.z_b)])),
        }
    }
    let y_max = (rows.iter().map(|r| r.z_b).fold(0.0, f64::max) * 10.0)
        .ceil()
        .max(1.0)
        / 10.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |s: f64| LEFT + s * plot_w;
    let y_of = |z: f64| TOP + (1.0 - z / y_max) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    svg.push_str("<desc>Entropy under no mixing; x axis: s, y axis: Z^b</desc>\n");
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=5 {
        let s = i as f64 / 5.0;
        let x = x_of(s);
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{s}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 19.0
        );
    }
    let steps = (y_max * 10.0).round() as usize;
    for i in 0..=steps {
        let z = i as f64 / 10.0;
        let y = y_of(z);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{z}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">s</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 18 {})">Z<tspan baseline-shift="super" font-size="10">b</tspan></text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, (p, points)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(s, z)| format!("{:.2},{:.2}", x_of(s), y_of(z)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let y = TOP + 16.0 + 20.0 * i as f64;
        let x = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">p = {p}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
