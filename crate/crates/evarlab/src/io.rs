//! Function files: one JSON document per grid function.
//!
//! ```json
//! {"dim": 1, "bounds": [0.0, 1.0], "shape": [4], "values": [0.0, 0.0, 1.0, 1.0]}
//! ```
//!
//! 2D files use `"bounds": [[x0, x1], [y0, y1]]` and `"shape": [nx, ny]` with
//! row-major values. 1D grids with explicit cell edges carry an extra
//! `"edges"` array. Floats are written in shortest round-trip form, so
//! writing and reading back is bit-exact.

use std::fmt;
use std::fs;
use std::path::Path;

use evarlab_core::{Domain, Error, GridFn};
use serde::Deserialize;

#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    /// Not a well-formed function document.
    Parse(String),
    /// Well-formed document describing an invalid function.
    Grid(Error),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Parse(msg) => write!(f, "parse error: {msg}"),
            IoError::Grid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IoError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IoError::Io(e) => Some(e),
            IoError::Grid(e) => Some(e),
            IoError::Parse(_) => None,
        }
    }
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Bounds {
    Interval([f64; 2]),
    Rect([[f64; 2]; 2]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FnDocument {
    dim: usize,
    bounds: Bounds,
    shape: Vec<usize>,
    #[serde(default)]
    edges: Option<Vec<f64>>,
    values: Vec<f64>,
}

impl FnDocument {
    fn domain(&self) -> Result<Domain, IoError> {
        let parse = |m: &str| IoError::Parse(m.to_string());
        match (self.dim, &self.bounds, self.shape.as_slice()) {
            (1, Bounds::Interval([a, b]), [n]) => match &self.edges {
                None => Domain::interval(*a, *b, *n).map_err(IoError::Grid),
                Some(edges) => {
                    if edges.len() != n + 1 {
                        return Err(parse("edges must have shape[0] + 1 entries"));
                    }
                    if edges.first() != Some(a) || edges.last() != Some(b) {
                        return Err(parse("edges must start and end at the bounds"));
                    }
                    Domain::breakpoints(edges.clone()).map_err(IoError::Grid)
                }
            },
            (2, Bounds::Rect([x, y]), [nx, ny]) => {
                if self.edges.is_some() {
                    return Err(parse("edges are only allowed in 1D"));
                }
                Domain::rect((x[0], x[1]), (y[0], y[1]), *nx, *ny).map_err(IoError::Grid)
            }
            (1 | 2, _, _) => Err(parse("bounds and shape do not match dim")),
            _ => Err(parse("dim must be 1 or 2")),
        }
    }
}

pub fn parse_fn(text: &str) -> Result<GridFn, IoError> {
    let doc: FnDocument = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    let domain = doc.domain()?;
    GridFn::new(domain, doc.values).map_err(IoError::Grid)
}

/// The document followed by a newline.
pub fn fn_to_json(u: &GridFn) -> String {
    let mut s = serde_json::to_string(u).expect("grid functions always serialize");
    s.push('\n');
    s
}

pub fn read_fn(path: impl AsRef<Path>) -> Result<GridFn, IoError> {
    parse_fn(&fs::read_to_string(path)?)
}

pub fn write_fn(u: &GridFn, path: impl AsRef<Path>) -> Result<(), IoError> {
    fs::write(path, fn_to_json(u))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let d = Domain::rect((-1.0, 2.5), (0.0, 0.1), 3, 2).unwrap();
        let vals = vec![0.1, 1.0 / 3.0, -2.0e-300, 1e300, std::f64::consts::PI, -0.0];
        let u = GridFn::new(d, vals.clone()).unwrap();
        let back = parse_fn(&fn_to_json(&u)).unwrap();
        assert_eq!(back, u);
        for (a, b) in back.values().iter().zip(&vals) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let e = Domain::breakpoints(vec![0.0, 0.1, 0.7, 1.0]).unwrap();
        let w = GridFn::new(e, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(parse_fn(&fn_to_json(&w)).unwrap(), w);
    }

    #[test]
    fn documented_layout() {
        let u = GridFn::new(Domain::interval(0.0, 1.0, 2).unwrap(), vec![0.0, 1.5]).unwrap();
        assert_eq!(fn_to_json(&u), "{\"dim\":1,\"bounds\":[0.0,1.0],\"shape\":[2],\"values\":[0.0,1.5]}\n");
    }

    #[test]
    fn malformed_inputs() {
        let r = parse_fn(r#"{"dim":1,"bounds":[0,1],"shape":[3],"values":[1,2,3,4]}"#);
        assert!(matches!(r, Err(IoError::Grid(Error::DimensionMismatch { expected: 3, found: 4 }))));
        let r = parse_fn(r#"{"dim":1,"bounds":[0,1],"shape":[3]}"#);
        assert!(matches!(r, Err(IoError::Parse(_))));
        let r = parse_fn(r#"{"dim":2,"bounds":[0,1],"shape":[3],"values":[1,2,3]}"#);
        assert!(matches!(r, Err(IoError::Parse(_))));
        let r = parse_fn(r#"{"dim":1,"bounds":[1,0],"shape":[1],"values":[1]}"#);
        assert!(matches!(r, Err(IoError::Grid(Error::InvalidDomain(_)))));
        let r = parse_fn(r#"{"dim":1,"bounds":[0,1],"shape":[2],"edges":[0,0.5,0.9],"values":[1,2]}"#);
        assert!(matches!(r, Err(IoError::Parse(_))));
        assert!(matches!(parse_fn("not json"), Err(IoError::Parse(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.json");
        let u = GridFn::new(Domain::interval(0.0, 2.0, 3).unwrap(), vec![1.0, -1.0, 0.25]).unwrap();
        write_fn(&u, &path).unwrap();
        assert_eq!(read_fn(&path).unwrap(), u);
        assert!(matches!(read_fn(dir.path().join("missing.json")), Err(IoError::Io(_))));
    }
}
