//! ASCII PLY reader and writer.
//!
//! Only the `vertex` element is interpreted: `x`, `y`, `z` are required,
//! `red`/`green`/`blue` (8-bit) become normalised RGB attributes, `intensity`
//! becomes an intensity column and `label` becomes the class label. Any other
//! property or element is skipped.

use std::fmt::Write as _;

use super::{Attributes, PointCloud};
use crate::{Error, Result};

#[derive(Debug)]
enum PropKind {
    Scalar,
    /// `property list <count type> <item type> name`
    List,
}

#[derive(Debug)]
struct Property {
    name: String,
    kind: PropKind,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

const SCALAR_TYPES: &[&str] = &[
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8", "int16",
    "uint16", "int32", "uint32", "float32", "float64",
];

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header<'a, I>(lines: &mut I) -> Result<(Vec<Element>, usize)>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        Some((n, _)) => return Err(parse_err(n, "missing `ply` magic")),
        None => return Err(parse_err(1, "empty input")),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    for (n, raw) in lines.by_ref() {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.first().copied() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                match tokens.get(1).copied() {
                    Some("ascii") => {}
                    Some(f @ ("binary_little_endian" | "binary_big_endian")) => {
                        return Err(Error::UnsupportedFormat(format!("binary PLY ({f})")));
                    }
                    _ => return Err(parse_err(n, format!("bad format line `{}`", raw.trim()))),
                }
                saw_format = true;
            }
            Some("element") => {
                if tokens.len() != 3 {
                    return Err(parse_err(n, "expected `element <name> <count>`"));
                }
                let count = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad element count `{}`", tokens[2])))?;
                elements.push(Element { name: tokens[1].to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "property before any element"))?;
                let prop = match tokens.get(1).copied() {
                    Some("list") if tokens.len() == 5 => {
                        Property { name: tokens[4].to_string(), kind: PropKind::List }
                    }
                    Some(ty) if tokens.len() == 3 && SCALAR_TYPES.contains(&ty) => {
                        Property { name: tokens[2].to_string(), kind: PropKind::Scalar }
                    }
                    _ => return Err(parse_err(n, format!("bad property line `{}`", raw.trim()))),
                };
                elem.props.push(prop);
            }
            Some("end_header") => {
                if !saw_format {
                    return Err(parse_err(n, "missing format line"));
                }
                return Ok((elements, n));
            }
            Some(other) => return Err(parse_err(n, format!("unexpected header keyword `{other}`"))),
        }
    }
    Err(parse_err(0, "missing end_header"))
}

fn next_row<'a, I>(lines: &mut I, last_line: &mut usize) -> Result<(usize, Vec<&'a str>)>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    for (n, l) in lines.by_ref() {
        *last_line = n;
        if !l.trim().is_empty() {
            return Ok((n, l.split_whitespace().collect()));
        }
    }
    Err(parse_err(*last_line + 1, "unexpected end of data"))
}

/// Parses an ASCII PLY document into a [`PointCloud`].
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    // Binary bodies are not UTF-8, so check the header before decoding the rest.
    let header_end = bytes
        .windows(10)
        .position(|w| w == b"end_header")
        .map_or(bytes.len(), |p| p + 10);
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| parse_err(1, "header is not UTF-8"))?;
    if header.contains("format binary") {
        let kind = header
            .lines()
            .find(|l| l.trim_start().starts_with("format"))
            .map(str::trim)
            .unwrap_or("format binary");
        return Err(Error::UnsupportedFormat(format!("binary PLY ({kind})")));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        parse_err(line, "body is not UTF-8")
    })?;

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (elements, header_line) = parse_header(&mut lines)?;
    let vertex = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(header_line, "no vertex element"))?;

    let find = |name: &str| elements[vertex].props.iter().position(|p| p.name == name);
    let (xi, yi, zi) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(parse_err(header_line, "vertex element lacks x, y or z")),
    };
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    let intensity = find("intensity");
    let label = find("label");

    let mut last_line = header_line;

    let mut positions = Vec::new();
    let mut colors = Vec::new();
    let mut intensities = Vec::new();
    let mut labels = Vec::new();

    for (ei, elem) in elements.iter().enumerate() {
        for row in 0..elem.count {
            let (n, tokens) = next_row(&mut lines, &mut last_line)?;
            if ei != vertex {
                continue;
            }
            // Resolve each property to its token position; lists carry a leading count.
            let mut values: Vec<&str> = Vec::with_capacity(elem.props.len());
            let mut t = 0;
            for p in &elem.props {
                let tok = tokens
                    .get(t)
                    .ok_or_else(|| parse_err(n, format!("vertex {row}: too few values")))?;
                values.push(tok);
                t += 1;
                if let PropKind::List = p.kind {
                    let len: usize =
                        tok.parse().map_err(|_| parse_err(n, format!("bad list length `{tok}`")))?;
                    t += len;
                }
            }
            if t > tokens.len() {
                return Err(parse_err(n, format!("vertex {row}: too few values")));
            }
            let num = |i: usize| -> Result<f64> {
                values[i]
                    .parse::<f64>()
                    .map_err(|_| parse_err(n, format!("bad number `{}`", values[i])))
            };
            let p = [num(xi)?, num(yi)?, num(zi)?];
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Data(format!("non-finite coordinate in vertex row {row} (line {n})")));
            }
            positions.push(p);
            if let Some([r, g, b]) = rgb {
                colors.push([num(r)? / 255.0, num(g)? / 255.0, num(b)? / 255.0]);
            }
            if let Some(i) = intensity {
                intensities.push(num(i)?);
            }
            if let Some(i) = label {
                let l = values[i]
                    .parse::<u32>()
                    .map_err(|_| parse_err(n, format!("bad label `{}`", values[i])))?;
                labels.push(l);
            }
        }
    }

    let mut cloud = PointCloud::new(positions)?;
    if rgb.is_some() {
        cloud = cloud.with_attributes(Attributes::Rgb(colors))?;
    } else if intensity.is_some() {
        cloud = cloud.with_attributes(Attributes::Intensity(intensities))?;
    }
    if label.is_some() {
        cloud = cloud.with_labels(labels)?;
    }
    Ok(cloud)
}

/// Writes a cloud as ASCII PLY. RGB is quantised to 8 bits.
pub fn serialize_ply(cloud: &PointCloud) -> String {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", cloud.len());
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    match cloud.attributes() {
        Some(Attributes::Rgb(_)) => {
            out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        }
        Some(Attributes::Intensity(_)) => out.push_str("property float intensity\n"),
        None => {}
    }
    if cloud.labels().is_some() {
        out.push_str("property uint label\n");
    }
    out.push_str("end_header\n");
    for (i, p) in cloud.positions().iter().enumerate() {
        let _ = write!(out, "{} {} {}", p[0], p[1], p[2]);
        match cloud.attributes() {
            Some(Attributes::Rgb(c)) => {
                let q = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
                let _ = write!(out, " {} {} {}", q(c[i][0]), q(c[i][1]), q(c[i][2]));
            }
            Some(Attributes::Intensity(v)) => {
                let _ = write!(out, " {}", v[i]);
            }
            None => {}
        }
        if let Some(l) = cloud.labels() {
            let _ = write!(out, " {}", l[i]);
        }
        out.push('\n');
    }
    out
}
