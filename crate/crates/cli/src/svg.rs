//! SVG output and the matching parse-back used by tests and `mp` itself.

use crate::error::{CliError, CliResult};
use mp_core::Points;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Style {
    /// Side of the square canvas in user units.
    pub canvas: f64,
    /// Dot radius in user units.
    pub radius: f64,
    pub stroke_width: f64,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            canvas: 512.0,
            radius: 1.5,
            stroke_width: 1.0,
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Maps a unit-square point to canvas coordinates, flipping `y` so that
/// larger `y` is higher on the page.
pub fn to_canvas(p: &[f64], canvas: f64) -> (f64, f64) {
    (p[0] * canvas, (1.0 - p[1]) * canvas)
}

fn check_plane(points: &Points) -> CliResult<()> {
    if points.dim() != 2 {
        return Err(CliError::Validation(format!(
            "SVG output needs planar points, got dimension {}",
            points.dim()
        )));
    }
    Ok(())
}

fn header(style: &Style, comments: &[String]) -> String {
    let c = num(style.canvas);
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for line in comments {
        // `--` may not appear inside an XML comment.
        s.push_str(&format!("<!-- {} -->\n", line.replace("--", "- -")));
    }
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n"
    ));
    s.push_str(&format!("<rect x=\"0\" y=\"0\" width=\"{c}\" height=\"{c}\" fill=\"white\"/>\n"));
    s
}

/// One black dot per point.
pub fn render_points(points: &Points, style: &Style, comments: &[String]) -> CliResult<String> {
    check_plane(points)?;
    let mut s = header(style, comments);
    let r = num(style.radius);
    for p in points.iter() {
        let (x, y) = to_canvas(p, style.canvas);
        s.push_str(&format!("<circle cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"black\"/>\n", num(x), num(y)));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// An open polyline through the points in order.
pub fn render_polyline(points: &Points, style: &Style, comments: &[String]) -> CliResult<String> {
    check_plane(points)?;
    let mut s = header(style, comments);
    if !points.is_empty() {
        let coords: Vec<String> = points
            .iter()
            .map(|p| {
                let (x, y) = to_canvas(p, style.canvas);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linejoin=\"round\"/>\n",
            coords.join(" "),
            num(style.stroke_width)
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn attr<'a>(element: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = element.find(&key)? + key.len();
    let len = element[start..].find('"')?;
    Some(&element[start..start + len])
}

fn elements<'a>(svg: &'a str, tag: &str) -> Vec<&'a str> {
    let open = format!("<{tag} ");
    svg.match_indices(&open)
        .filter_map(|(i, _)| {
            let end = svg[i..].find('>')?;
            Some(&svg[i..i + end])
        })
        .collect()
}

fn parse_num(s: &str) -> CliResult<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("bad number {s:?} in SVG")))
}

fn canvas_of(svg: &str) -> CliResult<f64> {
    let root = elements(svg, "svg")
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Validation("no <svg> element".into()))?;
    parse_num(attr(root, "width").ok_or_else(|| CliError::Validation("<svg> without width".into()))?)
}

fn from_canvas(x: f64, y: f64, canvas: f64) -> [f64; 2] {
    [x / canvas, 1.0 - y / canvas]
}

/// Dot centers of a document written by [`render_points`], in unit coordinates.
pub fn parse_circles(svg: &str) -> CliResult<Vec<[f64; 2]>> {
    let canvas = canvas_of(svg)?;
    elements(svg, "circle")
        .into_iter()
        .map(|e| {
            let x = parse_num(attr(e, "cx").unwrap_or_default())?;
            let y = parse_num(attr(e, "cy").unwrap_or_default())?;
            Ok(from_canvas(x, y, canvas))
        })
        .collect()
}

/// Vertices of the first polyline written by [`render_polyline`], in unit coordinates.
pub fn parse_polyline(svg: &str) -> CliResult<Vec<[f64; 2]>> {
    let canvas = canvas_of(svg)?;
    let Some(e) = elements(svg, "polyline").into_iter().next() else {
        return Ok(Vec::new());
    };
    let pts = attr(e, "points").unwrap_or_default();
    pts.split_whitespace()
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| CliError::Validation(format!("bad vertex {pair:?}")))?;
            Ok(from_canvas(parse_num(x)?, parse_num(y)?, canvas))
        })
        .collect()
}

/// Text of the XML comments preceding the root element.
pub fn comments(svg: &str) -> Vec<String> {
    svg.match_indices("<!--")
        .filter_map(|(i, _)| {
            let end = svg[i..].find("-->")?;
            Some(svg[i + 4..i + end].trim().to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn style() -> Style {
        Style {
            canvas: 100.0,
            ..Default::default()
        }
    }

    #[test]
    fn empty_document_has_no_shapes() {
        let svg = render_points(&Points::new(2, vec![]).unwrap(), &style(), &[]).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<circle"));
        assert!(parse_circles(&svg).unwrap().is_empty());
        let line = render_polyline(&Points::new(2, vec![]).unwrap(), &style(), &[]).unwrap();
        assert!(!line.contains("<polyline"));
    }

    #[test]
    fn center_maps_to_canvas_center() {
        let svg = render_points(&Points::new(2, vec![0.5, 0.5]).unwrap(), &style(), &[]).unwrap();
        assert!(svg.contains("<circle cx=\"50\" cy=\"50\""), "{svg}");
    }

    #[test]
    fn y_axis_points_up() {
        let svg = render_points(&Points::new(2, vec![0.25, 0.9]).unwrap(), &style(), &[]).unwrap();
        assert!(svg.contains("cx=\"25\" cy=\"10\""), "{svg}");
    }

    #[test]
    fn parse_back_recovers_vertices() {
        let pts = Points::new(2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]).unwrap();
        let svg = render_polyline(&pts, &style(), &["note -- here".into()]).unwrap();
        let back = parse_polyline(&svg).unwrap();
        assert_eq!(back.len(), 4);
        for (b, p) in back.iter().zip(pts.iter()) {
            assert!((b[0] - p[0]).abs() < 1e-3 && (b[1] - p[1]).abs() < 1e-3);
        }
        assert_eq!(comments(&svg), vec!["note - - here".to_string()]);
    }

    #[test]
    fn non_planar_points_are_rejected() {
        let pts = Points::new(3, vec![0.1, 0.2, 0.3]).unwrap();
        assert!(render_points(&pts, &style(), &[]).is_err());
    }
}
