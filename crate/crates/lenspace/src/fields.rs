//! Scalar fields on the domain and the runtime weight registry.
//!
//! Conformal weights, Lipschitz test functions and cutoffs all implement
//! [`ScalarField`]. Weight families used by experiment configs are selected
//! by name through [`WeightRegistry`], so a config can swap, say, a constant
//! weight for the collapsing-strip profile or a grid-sampled CSV field
//! without touching code.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexample::ProfileFamily;
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};
use crate::oracle::DistanceOracle;

/// A real-valued function on the domain.
pub trait ScalarField: Send + Sync {
    fn eval(&self, p: Point) -> f64;
    /// Short human-readable tag for reports.
    fn describe(&self) -> String;
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn eval(&self, p: Point) -> f64 {
        (**self).eval(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantField(pub f64);

impl ScalarField for ConstantField {
    fn eval(&self, _: Point) -> f64 {
        self.0
    }
    fn describe(&self) -> String {
        format!("const {}", self.0)
    }
}

/// `p -> oracle.dist(base, p)`, the canonical 1-Lipschitz function of a
/// metric. Panics if evaluated outside the oracle's domain.
pub struct DistanceToPoint {
    pub oracle: Arc<dyn DistanceOracle>,
    pub base: Point,
}

impl ScalarField for DistanceToPoint {
    fn eval(&self, p: Point) -> f64 {
        self.oracle
            .dist(self.base, p)
            .expect("distance-to-point field evaluated outside the oracle domain")
    }
    fn describe(&self) -> String {
        format!("d({:.4},{:.4} -> .) under {}", self.base.x1, self.base.x2, self.oracle.name())
    }
}

/// Pointwise scaling of another field.
pub struct ScaledField {
    pub inner: Arc<dyn ScalarField>,
    pub factor: f64,
}

impl ScalarField for ScaledField {
    fn eval(&self, p: Point) -> f64 {
        self.factor * self.inner.eval(p)
    }
    fn describe(&self) -> String {
        format!("{} * ({})", self.factor, self.inner.describe())
    }
}

/// A field sampled on a regular lattice, evaluated by bilinear interpolation
/// (clamped outside the lattice hull).
#[derive(Clone, Debug)]
pub struct GridField {
    x1s: Vec<f64>,
    x2s: Vec<f64>,
    /// row-major: values[j * x1s.len() + i]
    values: Vec<f64>,
}

impl GridField {
    pub fn new(x1s: Vec<f64>, x2s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x1s.len() < 2 || x2s.len() < 2 {
            return Err(Error::Field("grid field needs at least a 2x2 lattice".into()));
        }
        if values.len() != x1s.len() * x2s.len() {
            return Err(Error::Field(format!(
                "grid field expects {} values, got {}",
                x1s.len() * x2s.len(),
                values.len()
            )));
        }
        for v in [&x1s, &x2s] {
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Field("grid field coordinates must be strictly increasing".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Field("grid field values must be finite".into()));
        }
        Ok(GridField { x1s, x2s, values })
    }

    /// Sample `field` on a uniform `nx` x `ny` lattice over `rect`.
    pub fn sample(field: &dyn ScalarField, rect: Rect, nx: usize, ny: usize) -> Result<Self> {
        let x1s: Vec<f64> = (0..nx)
            .map(|i| rect.x1_lo + rect.width() * i as f64 / (nx - 1) as f64)
            .collect();
        let x2s: Vec<f64> = (0..ny)
            .map(|j| rect.x2_lo + rect.height() * j as f64 / (ny - 1) as f64)
            .collect();
        let mut values = Vec::with_capacity(nx * ny);
        for &x2 in &x2s {
            for &x1 in &x1s {
                values.push(field.eval(Point::new(x1, x2)));
            }
        }
        GridField::new(x1s, x2s, values)
    }

    pub fn value_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn bracket(coords: &[f64], x: f64) -> (usize, f64) {
        if x <= coords[0] {
            return (0, 0.0);
        }
        if x >= coords[coords.len() - 1] {
            return (coords.len() - 2, 1.0);
        }
        let i = match coords.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
            Ok(i) => return (i.min(coords.len() - 2), if i == coords.len() - 1 { 1.0 } else { 0.0 }),
            Err(i) => i - 1,
        };
        (i, (x - coords[i]) / (coords[i + 1] - coords[i]))
    }

    /// Read the `x1, x2, value` CSV wire format (rows in any order, complete
    /// lattice required; `#`-prefixed comment lines skipped).
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("x1") {
                continue;
            }
            let cols: Vec<&str> = t.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Field(format!("csv line {}: expected 3 columns", lineno + 1)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Field(format!("csv line {}: bad number {s:?}", lineno + 1)))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
        }
        let mut x1s: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut x2s: Vec<f64> = rows.iter().map(|r| r.1).collect();
        x1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        x1s.dedup();
        x2s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        x2s.dedup();
        let (nx, ny) = (x1s.len(), x2s.len());
        let mut values = vec![f64::NAN; nx * ny];
        for (x1, x2, v) in rows {
            let i = x1s.binary_search_by(|c| c.partial_cmp(&x1).unwrap()).unwrap();
            let j = x2s.binary_search_by(|c| c.partial_cmp(&x2).unwrap()).unwrap();
            values[j * nx + i] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Field("csv field does not cover a complete lattice".into()));
        }
        GridField::new(x1s, x2s, values)
    }

    /// Write the `x1, x2, value` CSV wire format, deterministic row order.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# scalar field grid v1: x1, x2, value")?;
        for (j, &x2) in self.x2s.iter().enumerate() {
            for (i, &x1) in self.x1s.iter().enumerate() {
                writeln!(w, "{},{},{}", x1, x2, self.values[j * self.x1s.len() + i])?;
            }
        }
        Ok(())
    }
}

impl ScalarField for GridField {
    fn eval(&self, p: Point) -> f64 {
        let (i, u) = Self::bracket(&self.x1s, p.x1);
        let (j, v) = Self::bracket(&self.x2s, p.x2);
        let nx = self.x1s.len();
        let f00 = self.values[j * nx + i];
        let f10 = self.values[j * nx + i + 1];
        let f01 = self.values[(j + 1) * nx + i];
        let f11 = self.values[(j + 1) * nx + i + 1];
        (1.0 - v) * ((1.0 - u) * f00 + u * f10) + v * ((1.0 - u) * f01 + u * f11)
    }
    fn describe(&self) -> String {
        format!("grid {}x{}", self.x1s.len(), self.x2s.len())
    }
}

/// A weight field with certified bounds, ready to induce a length distance.
pub struct BuiltWeight {
    pub field: Arc<dyn ScalarField>,
    pub w_min: f64,
    pub w_max: f64,
}

impl std::fmt::Debug for BuiltWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltWeight")
            .field("field", &self.field.describe())
            .field("w_min", &self.w_min)
            .field("w_max", &self.w_max)
            .finish()
    }
}

/// Wire format of a weight selection: a `kind` naming a registered family
/// plus family-specific parameters.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeightSpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl WeightSpec {
    pub fn constant(value: f64) -> Self {
        let mut params = serde_json::Map::new();
        params.insert("value".into(), serde_json::json!(value));
        WeightSpec { kind: "constant".into(), params }
    }

    pub fn profile(n: u32) -> Self {
        let mut params = serde_json::Map::new();
        params.insert("n".into(), serde_json::json!(n));
        WeightSpec { kind: "profile".into(), params }
    }
}

/// One buildable weight family, registered by name.
pub trait WeightFamily: Send + Sync {
    fn kind(&self) -> &'static str;
    fn build(&self, params: &serde_json::Map<String, serde_json::Value>) -> Result<BuiltWeight>;
}

/// Name-keyed registry of weight families. `WeightRegistry::builtin()` knows
/// `constant`, `profile` (the collapsing-strip family) and `grid` (CSV
/// fields); callers may register further families at runtime.
pub struct WeightRegistry {
    families: BTreeMap<&'static str, Box<dyn WeightFamily>>,
}

impl WeightRegistry {
    pub fn empty() -> Self {
        WeightRegistry { families: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = WeightRegistry::empty();
        r.register(Box::new(ConstantFamily));
        r.register(Box::new(ProfileWeightFamily));
        r.register(Box::new(GridCsvFamily));
        r
    }

    pub fn register(&mut self, family: Box<dyn WeightFamily>) {
        self.families.insert(family.kind(), family);
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn resolve(&self, spec: &WeightSpec) -> Result<BuiltWeight> {
        match self.families.get(spec.kind.as_str()) {
            Some(f) => f.build(&spec.params),
            None => Err(Error::config(
                "weight.kind",
                format!("unknown weight kind {:?}; registered: {:?}", spec.kind, self.kinds()),
            )),
        }
    }
}

fn from_params<T: serde::de::DeserializeOwned>(
    kind: &str,
    params: &serde_json::Map<String, serde_json::Value>,
) -> Result<T> {
    serde_json::from_value(serde_json::Value::Object(params.clone()))
        .map_err(|e| Error::config(format!("weight({kind})"), e.to_string()))
}

struct ConstantFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    value: f64,
}

impl WeightFamily for ConstantFamily {
    fn kind(&self) -> &'static str {
        "constant"
    }
    fn build(&self, params: &serde_json::Map<String, serde_json::Value>) -> Result<BuiltWeight> {
        let p: ConstantParams = from_params(self.kind(), params)?;
        if p.value <= 0.0 || !p.value.is_finite() {
            return Err(Error::config("weight(constant).value", "must be positive and finite"));
        }
        Ok(BuiltWeight { field: Arc::new(ConstantField(p.value)), w_min: p.value, w_max: p.value })
    }
}

struct ProfileWeightFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileParams {
    n: u32,
}

impl WeightFamily for ProfileWeightFamily {
    fn kind(&self) -> &'static str {
        "profile"
    }
    fn build(&self, params: &serde_json::Map<String, serde_json::Value>) -> Result<BuiltWeight> {
        let p: ProfileParams = from_params(self.kind(), params)?;
        let fam = ProfileFamily::new(p.n)?;
        Ok(BuiltWeight { field: Arc::new(fam), w_min: 1.0, w_max: 2.0 })
    }
}

struct GridCsvFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    path: String,
}

impl WeightFamily for GridCsvFamily {
    fn kind(&self) -> &'static str {
        "grid"
    }
    fn build(&self, params: &serde_json::Map<String, serde_json::Value>) -> Result<BuiltWeight> {
        let p: GridParams = from_params(self.kind(), params)?;
        let file = std::fs::File::open(&p.path)?;
        let field = GridField::read_csv(std::io::BufReader::new(file))?;
        let (w_min, w_max) = field.value_bounds();
        if w_min <= 0.0 || w_min.is_nan() {
            return Err(Error::Field(format!(
                "grid weight {} has non-positive minimum {w_min}",
                p.path
            )));
        }
        Ok(BuiltWeight { field: Arc::new(field), w_min, w_max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_interpolation_reproduces_linear_fields() {
        let g = GridField::sample(
            &ConstantField(3.0),
            Rect::unit_square(),
            5,
            5,
        )
        .unwrap();
        assert_eq!(g.eval(Point::new(0.321, 0.789)), 3.0);

        struct Linear;
        impl ScalarField for Linear {
            fn eval(&self, p: Point) -> f64 {
                1.0 + 2.0 * p.x1 - 0.5 * p.x2
            }
            fn describe(&self) -> String {
                "linear".into()
            }
        }
        let g = GridField::sample(&Linear, Rect::unit_square(), 9, 9).unwrap();
        for (x1, x2) in [(0.1, 0.9), (0.55, 0.25), (0.0, 1.0)] {
            let p = Point::new(x1, x2);
            assert!((g.eval(p) - Linear.eval(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = GridField::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridField::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.value_bounds(), (1.0, 6.0));
        assert_eq!(back.eval(Point::new(0.5, 0.0)), 2.0);
        assert_eq!(back.eval(Point::new(0.25, 0.5)), (1.0 + 2.0 + 4.0 + 5.0) / 4.0);
    }

    #[test]
    fn registry_resolves_builtins_and_rejects_unknown() {
        let reg = WeightRegistry::builtin();
        let w = reg.resolve(&WeightSpec::constant(2.0)).unwrap();
        assert_eq!((w.w_min, w.w_max), (2.0, 2.0));
        assert_eq!(w.field.eval(Point::new(0.3, 0.4)), 2.0);

        let w = reg.resolve(&WeightSpec::profile(4)).unwrap();
        assert_eq!((w.w_min, w.w_max), (1.0, 2.0));
        assert_eq!(w.field.eval(Point::new(0.5, 0.5)), 2.0);

        let spec = WeightSpec { kind: "nope".into(), params: Default::default() };
        let err = reg.resolve(&spec).unwrap_err().to_string();
        assert!(err.contains("unknown weight kind"), "{err}");

        // unknown family parameters are rejected with the family name
        let mut params = serde_json::Map::new();
        params.insert("value".into(), serde_json::json!(1.0));
        params.insert("typo".into(), serde_json::json!(1.0));
        let err = reg
            .resolve(&WeightSpec { kind: "constant".into(), params })
            .unwrap_err()
            .to_string();
        assert!(err.contains("constant"), "{err}");
    }

    #[test]
    fn runtime_registration_extends_the_family_set() {
        struct Bump;
        impl WeightFamily for Bump {
            fn kind(&self) -> &'static str {
                "bump"
            }
            fn build(
                &self,
                _: &serde_json::Map<String, serde_json::Value>,
            ) -> Result<BuiltWeight> {
                Ok(BuiltWeight { field: Arc::new(ConstantField(1.5)), w_min: 1.5, w_max: 1.5 })
            }
        }
        let mut reg = WeightRegistry::builtin();
        reg.register(Box::new(Bump));
        let spec = WeightSpec { kind: "bump".into(), params: Default::default() };
        assert_eq!(reg.resolve(&spec).unwrap().w_max, 1.5);
    }
}
