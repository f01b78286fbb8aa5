//! Serialization in the function file layout: `dim`, `bounds`, `shape`,
//! optional `edges` for breakpoint grids, and row-major `values`.

use core::fmt;

use serde::de::{self, Visitor};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grid::{Domain, GridFn, LpExponent, Shape};

fn domain_fields<S: SerializeStruct>(d: &Domain, st: &mut S) -> Result<(), S::Error> {
    match d.shape() {
        Shape::Interval { a, b, n_cells } => {
            st.serialize_field("dim", &1)?;
            st.serialize_field("bounds", &[a, b])?;
            st.serialize_field("shape", &[n_cells])?;
            st.skip_field("edges")
        }
        Shape::Breakpoints { edges } => {
            st.serialize_field("dim", &1)?;
            st.serialize_field("bounds", &[edges[0], edges[edges.len() - 1]])?;
            st.serialize_field("shape", &[edges.len() - 1])?;
            st.serialize_field("edges", edges)
        }
        Shape::Rect { x_range, y_range, nx, ny } => {
            st.serialize_field("dim", &2)?;
            st.serialize_field("bounds", &[[x_range.0, x_range.1], [y_range.0, y_range.1]])?;
            st.serialize_field("shape", &[nx, ny])?;
            st.skip_field("edges")
        }
    }
}

fn field_count(d: &Domain) -> usize {
    match d.shape() {
        Shape::Breakpoints { .. } => 4,
        _ => 3,
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Domain", field_count(self))?;
        domain_fields(self, &mut st)?;
        st.end()
    }
}

impl Serialize for GridFn {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GridFn", field_count(self.domain()) + 1)?;
        domain_fields(self.domain(), &mut st)?;
        st.serialize_field("values", self.values())?;
        st.end()
    }
}

/// Finite exponents serialize as numbers, infinity as the string `"inf"`.
impl Serialize for LpExponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.get())
        }
    }
}

struct ExponentVisitor;

impl Visitor<'_> for ExponentVisitor {
    type Value = LpExponent;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number >= 1 or \"inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<LpExponent, E> {
        LpExponent::new(v).map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<LpExponent, E> {
        self.visit_f64(v as f64)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<LpExponent, E> {
        self.visit_f64(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<LpExponent, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ExponentVisitor)
    }
}
