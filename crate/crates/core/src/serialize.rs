//! Report float serialization.
//!
//! Report JSON pins floats to 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly and keeps output byte-stable across runs.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

fn raw_f17<S: Serializer>(v: f64, serializer: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        let raw = RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    } else {
        // bounds are finite by construction; a non-finite value would be a bug
        serializer.serialize_none()
    }
}

pub(crate) fn ser_f17<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    raw_f17(*v, serializer)
}

pub(crate) fn ser_f17_opt<S: Serializer>(
    v: &Option<f64>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => raw_f17(*x, serializer),
        None => serializer.serialize_none(),
    }
}

struct F17Slice<'a>(&'a [f64]);

impl Serialize for F17Slice<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for &v in self.0 {
            struct One(f64);
            impl Serialize for One {
                fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                    raw_f17(self.0, s)
                }
            }
            seq.serialize_element(&One(v))?;
        }
        seq.end()
    }
}

pub(crate) fn ser_f17_vec<S: Serializer>(v: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    F17Slice(v).serialize(serializer)
}

pub(crate) fn ser_f17_vec_opt<S: Serializer>(
    v: &Option<Vec<f64>>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => F17Slice(x).serialize(serializer),
        None => serializer.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    #[derive(serde::Serialize)]
    struct Probe {
        #[serde(serialize_with = "super::ser_f17")]
        x: f64,
        #[serde(serialize_with = "super::ser_f17_vec")]
        xs: Vec<f64>,
    }

    #[test]
    fn seventeen_significant_digits() {
        let p = Probe {
            x: 1.2778886877331397,
            xs: vec![2.0, -0.5],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"x":1.2778886877331397e0,"xs":[2.0000000000000000e0,-5.0000000000000000e-1]}"#
        );
    }

    #[test]
    fn round_trips_exactly() {
        let v = std::f64::consts::PI / 17.0;
        let s = format!("{v:.16e}");
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}
