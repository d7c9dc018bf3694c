//! Parameterised membership curves.
//!
//! Every shape maps a crisp value to a degree in `[0, 1]`. Parameter
//! conventions follow the usual toolbox ordering, so a table of
//! `trapmf [a b c d]` or `gbellmf [a b c]` values can be transcribed
//! directly.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::Violation;

/// Curve family, used in configuration files and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Trapezoid,
    ZSpline,
    SSpline,
    GeneralizedBell,
    Gaussian,
}

impl Shape {
    pub fn arity(self) -> usize {
        match self {
            Shape::Trapezoid => 4,
            Shape::ZSpline | Shape::SSpline => 2,
            Shape::GeneralizedBell => 3,
            Shape::Gaussian => 2,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Shape::Trapezoid => "trapezoid",
            Shape::ZSpline => "z_spline",
            Shape::SSpline => "s_spline",
            Shape::GeneralizedBell => "generalized_bell",
            Shape::Gaussian => "gaussian",
        };
        f.write_str(s)
    }
}

/// A membership function with its parameters.
///
/// The variants are plain data so that a malformed curve can still be
/// represented (for instance while loading a configuration) and reported by
/// [`MembershipFunction::violations`]. Use [`MembershipFunction::new`] to get
/// a checked value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembershipFunction {
    /// Rises on `[a, b]`, flat at 1 on `[b, c]`, falls on `[c, d]`.
    /// `a == b` or `c == d` gives a vertical edge (a shoulder).
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
    /// Falling spline: 1 up to `a`, 0 from `b`.
    ZSpline { a: f64, b: f64 },
    /// Rising spline: 0 up to `a`, 1 from `b`.
    SSpline { a: f64, b: f64 },
    /// `1 / (1 + |(x - center) / width|^(2 slope))`.
    GeneralizedBell { width: f64, slope: f64, center: f64 },
    /// `exp(-(x - center)^2 / (2 sigma^2))`.
    Gaussian { sigma: f64, center: f64 },
}

impl MembershipFunction {
    /// Builds a curve from a shape and a toolbox-ordered parameter list,
    /// rejecting parameters that break the shape's invariants.
    pub fn new(shape: Shape, params: &[f64]) -> Result<Self, Vec<Violation>> {
        let mf = Self::from_parts(shape, params)?;
        let violations = mf.violations("");
        if violations.is_empty() {
            Ok(mf)
        } else {
            Err(violations)
        }
    }

    /// Like [`new`](Self::new) but only checks the parameter count.
    pub fn from_parts(shape: Shape, params: &[f64]) -> Result<Self, Vec<Violation>> {
        if params.len() != shape.arity() {
            return Err(vec![Violation::Arity { shape, expected: shape.arity(), got: params.len() }]);
        }
        let p = params;
        Ok(match shape {
            Shape::Trapezoid => MembershipFunction::Trapezoid { a: p[0], b: p[1], c: p[2], d: p[3] },
            Shape::ZSpline => MembershipFunction::ZSpline { a: p[0], b: p[1] },
            Shape::SSpline => MembershipFunction::SSpline { a: p[0], b: p[1] },
            Shape::GeneralizedBell => MembershipFunction::GeneralizedBell { width: p[0], slope: p[1], center: p[2] },
            Shape::Gaussian => MembershipFunction::Gaussian { sigma: p[0], center: p[1] },
        })
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::checked(MembershipFunction::Trapezoid { a, b, c, d })
    }

    pub fn z_spline(a: f64, b: f64) -> Self {
        Self::checked(MembershipFunction::ZSpline { a, b })
    }

    pub fn s_spline(a: f64, b: f64) -> Self {
        Self::checked(MembershipFunction::SSpline { a, b })
    }

    pub fn generalized_bell(width: f64, slope: f64, center: f64) -> Self {
        Self::checked(MembershipFunction::GeneralizedBell { width, slope, center })
    }

    pub fn gaussian(sigma: f64, center: f64) -> Self {
        Self::checked(MembershipFunction::Gaussian { sigma, center })
    }

    // The shorthand constructors are for literals in code; bad literals are
    // programming errors.
    fn checked(mf: Self) -> Self {
        let v = mf.violations("");
        assert!(v.is_empty(), "invalid membership function {mf:?}: {v:?}");
        mf
    }

    pub fn shape(&self) -> Shape {
        match self {
            MembershipFunction::Trapezoid { .. } => Shape::Trapezoid,
            MembershipFunction::ZSpline { .. } => Shape::ZSpline,
            MembershipFunction::SSpline { .. } => Shape::SSpline,
            MembershipFunction::GeneralizedBell { .. } => Shape::GeneralizedBell,
            MembershipFunction::Gaussian { .. } => Shape::Gaussian,
        }
    }

    /// Parameters in toolbox order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::Trapezoid { a, b, c, d } => vec![a, b, c, d],
            MembershipFunction::ZSpline { a, b } | MembershipFunction::SSpline { a, b } => vec![a, b],
            MembershipFunction::GeneralizedBell { width, slope, center } => vec![width, slope, center],
            MembershipFunction::Gaussian { sigma, center } => vec![sigma, center],
        }
    }

    /// Parameter problems, each tagged with `owner` (e.g. `"speed.lowrisk"`).
    pub fn violations(&self, owner: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        let bad = |reason: &str| Violation::Parameters {
            owner: owner.to_string(),
            shape: self.shape(),
            params: self.params(),
            reason: reason.to_string(),
        };
        if self.params().iter().any(|p| !p.is_finite()) {
            out.push(bad("parameters must be finite"));
            return out;
        }
        match *self {
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if !(a <= b && b <= c && c <= d) {
                    out.push(bad("trapezoid requires a <= b <= c <= d"));
                }
            }
            MembershipFunction::ZSpline { a, b } | MembershipFunction::SSpline { a, b } => {
                if a >= b {
                    out.push(bad("spline requires a < b"));
                }
            }
            MembershipFunction::GeneralizedBell { width, slope, .. } => {
                if width <= 0.0 || slope <= 0.0 {
                    out.push(bad("bell requires positive width and slope"));
                }
            }
            MembershipFunction::Gaussian { sigma, .. } => {
                if sigma <= 0.0 {
                    out.push(bad("gaussian requires sigma > 0"));
                }
            }
        }
        out
    }

    /// Degree of membership of `x`.
    ///
    /// ```
    /// use autometric::fuzzy::MembershipFunction;
    /// let low = MembershipFunction::trapezoid(0.0, 0.0, 40.0, 80.0);
    /// assert_eq!(low.eval(20.0), 1.0);
    /// assert_eq!(low.eval(60.0), 0.5);
    /// ```
    pub fn eval(&self, x: f64) -> f64 {
        let y = match *self {
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x < b {
                    (x - a) / (b - a)
                } else if x <= c {
                    1.0
                } else {
                    (d - x) / (d - c)
                }
            }
            MembershipFunction::ZSpline { a, b } => z_spline(a, b, x),
            MembershipFunction::SSpline { a, b } => s_spline(a, b, x),
            MembershipFunction::GeneralizedBell { width, slope, center } => {
                1.0 / (1.0 + ((x - center) / width).abs().powf(2.0 * slope))
            }
            MembershipFunction::Gaussian { sigma, center } => {
                let z = x - center;
                (-(z * z) / (2.0 * sigma * sigma)).exp()
            }
        };
        // NaN only shows up for unchecked parameters.
        if y.is_nan() {
            0.0
        } else {
            y.clamp(0.0, 1.0)
        }
    }
}

fn z_spline(a: f64, b: f64, x: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if x <= a {
        1.0
    } else if x <= mid {
        let u = (x - a) / (b - a);
        1.0 - 2.0 * u * u
    } else if x < b {
        let u = (b - x) / (b - a);
        2.0 * u * u
    } else {
        0.0
    }
}

fn s_spline(a: f64, b: f64, x: f64) -> f64 {
    let mid = 0.5 * (a + b);
    if x <= a {
        0.0
    } else if x <= mid {
        let u = (x - a) / (b - a);
        2.0 * u * u
    } else if x < b {
        let u = (b - x) / (b - a);
        1.0 - 2.0 * u * u
    } else {
        1.0
    }
}

/// Serialized form: `{"shape": "trapezoid", "params": [0, 0, 40, 80]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfSpec {
    pub shape: Shape,
    pub params: Vec<f64>,
}

impl From<&MembershipFunction> for MfSpec {
    fn from(mf: &MembershipFunction) -> Self {
        MfSpec { shape: mf.shape(), params: mf.params() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trapezoid_points() {
        let low = MembershipFunction::trapezoid(0.0, 0.0, 40.0, 80.0);
        assert_eq!(low.eval(0.0), 1.0);
        assert_eq!(low.eval(20.0), 1.0);
        assert_eq!(low.eval(40.0), 1.0);
        assert_eq!(low.eval(60.0), 0.5);
        assert_eq!(low.eval(80.0), 0.0);
        let high = MembershipFunction::trapezoid(40.0, 80.0, 100.0, 100.0);
        assert_eq!(high.eval(60.0), 0.5);
        assert_eq!(high.eval(100.0), 1.0);
        assert_eq!(high.eval(20.0), 0.0);
    }

    #[test]
    fn degenerate_edges_are_shoulders() {
        let left = MembershipFunction::trapezoid(0.0, 0.0, 5.0, 6.0);
        assert_eq!(left.eval(0.0), 1.0);
        let right = MembershipFunction::trapezoid(5.0, 6.0, 10.0, 10.0);
        assert_eq!(right.eval(10.0), 1.0);
        assert_eq!(right.eval(10.5), 0.0);
        // a rectangle
        let rect = MembershipFunction::trapezoid(2.0, 2.0, 3.0, 3.0);
        assert_eq!(rect.eval(2.0), 1.0);
        assert_eq!(rect.eval(3.0), 1.0);
        assert_eq!(rect.eval(1.999), 0.0);
    }

    #[test]
    fn spline_points() {
        let z = MembershipFunction::z_spline(7.0, 10.0);
        assert_eq!(z.eval(8.5), 0.5);
        assert_eq!(z.eval(7.0), 1.0);
        assert_eq!(z.eval(10.0), 0.0);
        let s = MembershipFunction::s_spline(4.0, 7.0);
        assert_eq!(s.eval(5.5), 0.5);
        assert_eq!(s.eval(4.0), 0.0);
        assert_eq!(s.eval(7.0), 1.0);
        // quarter point: 2 * 0.25^2
        assert!((s.eval(4.75) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn bell_and_gaussian() {
        let bell = MembershipFunction::generalized_bell(4.5, 3.0, 1.0);
        assert_eq!(bell.eval(1.0), 1.0);
        assert!((bell.eval(5.5) - 0.5).abs() < 1e-12);
        let g = MembershipFunction::gaussian(1.0, 7.0);
        assert_eq!(g.eval(7.0), 1.0);
        assert!((g.eval(8.0) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_are_reported() {
        let err = MembershipFunction::new(Shape::Trapezoid, &[5.0, 4.0, 3.0, 2.0]).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(MembershipFunction::new(Shape::ZSpline, &[3.0, 3.0]).is_err());
        assert!(MembershipFunction::new(Shape::GeneralizedBell, &[0.0, 1.0, 1.0]).is_err());
        assert!(MembershipFunction::new(Shape::Gaussian, &[-1.0, 1.0]).is_err());
        assert!(MembershipFunction::new(Shape::Gaussian, &[1.0]).is_err());
        assert!(MembershipFunction::new(Shape::Gaussian, &[f64::NAN, 1.0]).is_err());
    }

    fn any_mf() -> impl Strategy<Value = MembershipFunction> {
        let pts = proptest::collection::vec(-50.0..50.0f64, 4);
        prop_oneof![
            pts.prop_map(|mut v| {
                v.sort_by(f64::total_cmp);
                MembershipFunction::trapezoid(v[0], v[1], v[2], v[3])
            }),
            (-50.0..50.0f64, 0.01..20.0f64).prop_map(|(a, w)| MembershipFunction::z_spline(a, a + w)),
            (-50.0..50.0f64, 0.01..20.0f64).prop_map(|(a, w)| MembershipFunction::s_spline(a, a + w)),
            (0.01..10.0f64, 0.01..10.0f64, -50.0..50.0f64)
                .prop_map(|(w, s, c)| MembershipFunction::generalized_bell(w, s, c)),
            (0.01..10.0f64, -50.0..50.0f64).prop_map(|(s, c)| MembershipFunction::gaussian(s, c)),
        ]
    }

    proptest! {
        #[test]
        fn degree_is_bounded(mf in any_mf(), x in -100.0..100.0f64) {
            let y = mf.eval(x);
            prop_assert!((0.0..=1.0).contains(&y));
        }

        #[test]
        fn splines_are_complementary(a in -20.0..20.0f64, w in 0.01..20.0f64, t in 0.0..=1.0f64) {
            let x = a + t * w;
            let z = MembershipFunction::z_spline(a, a + w).eval(x);
            let s = MembershipFunction::s_spline(a, a + w).eval(x);
            prop_assert!((z + s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn splines_are_monotone(a in -20.0..20.0f64, w in 0.01..20.0f64, x in -40.0..40.0f64, dx in 0.0..5.0f64) {
            let z = MembershipFunction::z_spline(a, a + w);
            let s = MembershipFunction::s_spline(a, a + w);
            prop_assert!(z.eval(x + dx) <= z.eval(x) + 1e-15);
            prop_assert!(s.eval(x + dx) + 1e-15 >= s.eval(x));
        }
    }
}
