//! Static SVG figures.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use emogap_core::gap_analysis::kmeans::ClusterComposition;
use emogap_core::gap_analysis::{CentroidStats, Projection2D};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Points coloured by dataset with each dataset centroid drawn as a large ×.
pub fn scatter(projection: &Projection2D, title: &str) -> String {
    let (w, h, margin, legend_w) = (640.0, 520.0, 40.0, 110.0);
    let xs = projection.points.iter().map(|p| p[0]);
    let ys = projection.points.iter().map(|p| p[1]);
    let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let plot_w = w - 2.0 * margin - legend_w;
    let plot_h = h - 2.0 * margin;
    let sx = |x: f64| margin + (x - x0) / span(x0, x1) * plot_w;
    let sy = |y: f64| h - margin - (y - y0) / span(y0, y1) * plot_h;

    let names: Vec<&str> = projection.centroids.iter().map(|(n, _)| n.as_str()).collect();
    let index = |label: &str| names.iter().position(|n| *n == label).unwrap_or(0);

    let mut out = open(w, h);
    let _ = writeln!(out, "<text x=\"{margin}\" y=\"24\" font-size=\"14\">{}</text>", escape(title));
    for (p, label) in projection.points.iter().zip(&projection.labels) {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.6\"/>",
            sx(p[0]),
            sy(p[1]),
            colour(index(label))
        );
    }
    for (i, (name, c)) in projection.centroids.iter().enumerate() {
        let (cx, cy) = (sx(c[0]), sy(c[1]));
        let _ = writeln!(
            out,
            "<path d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" stroke=\"black\" stroke-width=\"5\"/><path d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" stroke=\"{}\" stroke-width=\"3\"><title>{} centroid</title></path>",
            cx - 7.0, cy - 7.0, cx + 7.0, cy + 7.0, cx - 7.0, cy + 7.0, cx + 7.0, cy - 7.0,
            cx - 7.0, cy - 7.0, cx + 7.0, cy + 7.0, cx - 7.0, cy + 7.0, cx + 7.0, cy - 7.0,
            colour(i),
            escape(name)
        );
        let ly = margin + 18.0 * i as f64;
        let lx = w - legend_w + 10.0;
        let _ = writeln!(
            out,
            "<rect x=\"{lx}\" y=\"{ly}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            colour(i),
            lx + 16.0,
            ly + 10.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Distance matrix heatmap annotated with values, μ and σ².
pub fn heatmap(stats: &CentroidStats, title: &str) -> String {
    let k = stats.names.len();
    let cell = 56.0;
    let (left, top) = (60.0, 60.0);
    let w = left + cell * k as f64 + 20.0;
    let h = top + cell * k as f64 + 20.0;
    let max = stats.distances.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let mut out = open(w, h);
    let _ = writeln!(
        out,
        "<text x=\"10\" y=\"22\" font-size=\"14\">{} (\u{3bc}={:.2}, \u{3c3}\u{b2}={:.2})</text>",
        escape(title),
        stats.mean,
        stats.variance
    );
    for (i, name) in stats.names.iter().enumerate() {
        let pos = cell * i as f64 + cell / 2.0;
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", left + pos, top - 8.0, escape(name));
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", left - 8.0, top + pos + 4.0, escape(name));
    }
    for (i, row) in stats.distances.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            let t = if max > 0.0 { d / max } else { 0.0 };
            let shade = (255.0 - 200.0 * t).round() as u8;
            let (x, y) = (left + cell * j as f64, top + cell * i as f64);
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({shade},{shade},255)\" stroke=\"white\"/><text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{d:.2}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn stacked_bar(out: &mut String, x: f64, y: f64, width: f64, counts: &[(usize, usize)], total: usize) {
    let mut offset = 0.0;
    for &(category, count) in counts {
        let len = if total > 0 { width * count as f64 / total as f64 } else { 0.0 };
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{y}\" width=\"{len:.2}\" height=\"14\" fill=\"{}\"/>",
            x + offset,
            colour(category)
        );
        offset += len;
    }
}

/// Per-cluster proportions by dataset and by genre as stacked bars.
pub fn composition(clusters: &[ClusterComposition], title: &str) -> String {
    let datasets: Vec<String> = clusters.iter().flat_map(|c| c.datasets.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let genres: Vec<String> = clusters.iter().flat_map(|c| c.genres.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let (left, bar_w, row_h) = (110.0, 320.0, 44.0);
    let legend_rows = datasets.len().max(genres.len());
    let w = left + bar_w + 220.0;
    let h = 50.0 + row_h * clusters.len() as f64 + 18.0 * legend_rows as f64 + 30.0;
    let mut out = open(w, h);
    let _ = writeln!(out, "<text x=\"10\" y=\"22\" font-size=\"14\">{}</text>", escape(title));
    for (r, c) in clusters.iter().enumerate() {
        let y = 40.0 + row_h * r as f64;
        let label = if c.is_empty() { format!("cluster {} (empty)", c.cluster) } else { format!("cluster {} (n={})", c.cluster, c.size) };
        let _ = writeln!(out, "<text x=\"10\" y=\"{:.1}\">{}</text>", y + 18.0, escape(&label));
        let ds: Vec<(usize, usize)> = c.datasets.iter().map(|(k, &v)| (datasets.iter().position(|d| d == k).unwrap_or(0), v)).collect();
        let gs: Vec<(usize, usize)> = c.genres.iter().map(|(k, &v)| (genres.iter().position(|g| g == k).unwrap_or(0), v)).collect();
        stacked_bar(&mut out, left, y, bar_w, &ds, c.size);
        stacked_bar(&mut out, left, y + 18.0, bar_w, &gs, c.size);
    }
    let ly = 50.0 + row_h * clusters.len() as f64;
    let _ = writeln!(out, "<text x=\"{left}\" y=\"{ly}\">top bar: dataset</text><text x=\"{}\" y=\"{ly}\">bottom bar: genre</text>", left + 170.0);
    for (i, d) in datasets.iter().enumerate() {
        let y = ly + 10.0 + 18.0 * i as f64;
        let _ = writeln!(out, "<rect x=\"{left}\" y=\"{y}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>", colour(i), left + 16.0, y + 10.0, escape(d));
    }
    for (i, g) in genres.iter().enumerate() {
        let x = left + 170.0;
        let y = ly + 10.0 + 18.0 * i as f64;
        let _ = writeln!(out, "<rect x=\"{x}\" y=\"{y}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>", colour(i), x + 16.0, y + 10.0, escape(g));
    }
    out.push_str("</svg>\n");
    out
}
