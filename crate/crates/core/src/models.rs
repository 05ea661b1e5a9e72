//! The builtin operator catalog.
//!
//! Each [`OperatorModel`] bundles the generators `X_1, …, X_m` and `X_0` on
//! `R^N` with the group law and dilation leaving the operator invariant, plus
//! whatever closed forms are known (constant-control exponentials, attainable
//! set oracle, fundamental solution, extremal solutions).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::VectorField;
use crate::groups::{Dilation, GroupLaw, LayerStructure};
use crate::math;
use crate::point::Point;

/// Identifies a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `∂_t − Δ` on `R^n`.
    Heat,
    /// Heat operator of the Heisenberg sub-Laplacian.
    HeisenbergHeat,
    /// `∂_t − Δ_x − ⟨x, ∇_y⟩` on `R^{2m}`.
    Kolmogorov,
    /// `∂_t − ∂_x² − cos x ∂_y − sin x ∂_w`.
    Mumford,
    /// `∂_t − ∂_x² − x² ∂_y − x ∂_w`.
    Cmp,
    /// `∂_t − ∂_x² − x² ∂_y²`.
    Grushin,
    /// Grushin operator lifted to a Carnot group on `R^3`.
    GrushinLifted,
    /// `∂_t − Δ − ⟨x, ∇⟩` on `R^n`.
    OrnsteinUhlenbeck,
    /// Heisenberg heat operator coupled to a Kolmogorov drift.
    Linked,
    /// User-assembled operator.
    Custom,
}

impl ModelKind {
    /// Canonical catalog name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Heat => "heat",
            ModelKind::HeisenbergHeat => "heisenberg_heat",
            ModelKind::Kolmogorov => "kolmogorov",
            ModelKind::Mumford => "mumford",
            ModelKind::Cmp => "cmp",
            ModelKind::Grushin => "grushin",
            ModelKind::GrushinLifted => "grushin_lifted",
            ModelKind::OrnsteinUhlenbeck => "ou",
            ModelKind::Linked => "linked",
            ModelKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An operator `∂_t − Σ X_j² − X_0` with its symmetry data.
#[derive(Debug, Clone)]
pub struct OperatorModel {
    kind: ModelKind,
    name: String,
    n: usize,
    generators: Vec<VectorField>,
    drift_x0: VectorField,
    law: GroupLaw,
    left_invariant: bool,
    dilation: Option<Dilation>,
    layers: Option<LayerStructure>,
    hormander_order: Option<usize>,
}

fn v(i: usize) -> Expr {
    Expr::var(i)
}

fn c(x: f64) -> Expr {
    Expr::c(x)
}

fn coord(n: usize, i: usize) -> VectorField {
    VectorField::coordinate(n, i)
}

fn field(coeffs: Vec<Expr>) -> VectorField {
    VectorField::analytic(coeffs)
}

impl OperatorModel {
    #[allow(clippy::too_many_arguments)]
    fn builtin(
        kind: ModelKind,
        n: usize,
        generators: Vec<VectorField>,
        drift_x0: VectorField,
        law: GroupLaw,
        dilation: Option<Vec<u32>>,
        layers: Option<Vec<Vec<usize>>>,
        hormander_order: usize,
    ) -> Self {
        let name = match kind {
            ModelKind::Heat if n != 2 => format!("heat({n})"),
            ModelKind::OrnsteinUhlenbeck if n != 1 => format!("ou({n})"),
            ModelKind::Kolmogorov if n != 2 => format!("kolmogorov({})", n / 2),
            _ => kind.name().to_string(),
        };
        OperatorModel {
            kind,
            name,
            n,
            generators,
            drift_x0,
            law,
            left_invariant: kind != ModelKind::Grushin,
            dilation: dilation.map(|e| Dilation::new(e).expect("builtin dilation is valid")),
            layers: layers.map(|l| LayerStructure::new(l, n).expect("builtin layers partition N")),
            hormander_order: Some(hormander_order),
        }
    }

    /// Heat operator on `R^n`, invariant under Euclidean translations.
    pub fn heat(n: usize) -> Self {
        assert!(n >= 1, "heat needs n ≥ 1");
        let mut dil = vec![1; n];
        dil.push(2);
        Self::builtin(
            ModelKind::Heat,
            n,
            (0..n).map(|j| coord(n, j)).collect(),
            VectorField::zero(n),
            GroupLaw::Euclidean { n },
            Some(dil),
            Some(vec![(0..n).collect()]),
            1,
        )
    }

    /// `∂_t − X_1² − X_2²` with `X_1 = ∂_x − (y/2)∂_z`, `X_2 = ∂_y + (x/2)∂_z`.
    pub fn heisenberg_heat() -> Self {
        Self::builtin(
            ModelKind::HeisenbergHeat,
            3,
            vec![field(vec![c(1.0), c(0.0), -0.5 * v(1)]), field(vec![c(0.0), c(1.0), 0.5 * v(0)])],
            VectorField::zero(3),
            GroupLaw::Heisenberg,
            Some(vec![1, 1, 2, 2]),
            Some(vec![vec![0, 1], vec![2]]),
            2,
        )
    }

    /// Kolmogorov operator on `(x, y) ∈ R^m × R^m`: `X_j = ∂_{x_j}`, `X_0 = ⟨x, ∇_y⟩`.
    pub fn kolmogorov(m: usize) -> Self {
        assert!(m >= 1, "kolmogorov needs m ≥ 1");
        let n = 2 * m;
        let mut x0 = vec![c(0.0); n];
        for j in 0..m {
            x0[m + j] = v(j);
        }
        let mut dil = vec![1; m];
        dil.extend(core::iter::repeat_n(3, m));
        dil.push(2);
        Self::builtin(
            ModelKind::Kolmogorov,
            n,
            (0..m).map(|j| coord(n, j)).collect(),
            field(x0),
            GroupLaw::Kolmogorov { m },
            Some(dil),
            None,
            2,
        )
    }

    /// Mumford operator on `(x, y, w)`: `X = ∂_x`, `X_0 = cos x ∂_y + sin x ∂_w`.
    pub fn mumford() -> Self {
        Self::builtin(
            ModelKind::Mumford,
            3,
            vec![coord(3, 0)],
            field(vec![c(0.0), v(0).cos(), v(0).sin()]),
            GroupLaw::Mumford,
            None,
            None,
            3,
        )
    }

    /// `X = ∂_x`, `X_0 = x² ∂_y + x ∂_w` on `(x, y, w)`.
    pub fn cmp() -> Self {
        Self::builtin(
            ModelKind::Cmp,
            3,
            vec![coord(3, 0)],
            field(vec![c(0.0), v(0) * v(0), v(0)]),
            GroupLaw::Cmp,
            Some(vec![1, 4, 3, 2]),
            None,
            3,
        )
    }

    /// Grushin evolution operator on `(x, y)`: `X_1 = ∂_x`, `X_2 = x ∂_y`.
    ///
    /// Not invariant under any transitive group; the Euclidean law is
    /// attached only as carrier and [`Self::is_left_invariant`] is false.
    pub fn grushin() -> Self {
        Self::builtin(
            ModelKind::Grushin,
            2,
            vec![coord(2, 0), field(vec![c(0.0), v(0)])],
            VectorField::zero(2),
            GroupLaw::Euclidean { n: 2 },
            Some(vec![1, 2, 2]),
            None,
            2,
        )
    }

    /// Lifted Grushin operator on `(x, y, w)`: `X_1 = ∂_x`, `X_2 = ∂_w + x ∂_y`.
    pub fn grushin_lifted() -> Self {
        Self::builtin(
            ModelKind::GrushinLifted,
            3,
            vec![coord(3, 0), field(vec![c(0.0), v(0), c(1.0)])],
            VectorField::zero(3),
            GroupLaw::GrushinLifted,
            Some(vec![1, 2, 1, 2]),
            Some(vec![vec![0, 2], vec![1]]),
            2,
        )
    }

    /// Ornstein–Uhlenbeck operator `∂_t − Δ − ⟨x, ∇⟩` on `R^n`.
    pub fn ou(n: usize) -> Self {
        assert!(n >= 1, "ou needs n ≥ 1");
        Self::builtin(
            ModelKind::OrnsteinUhlenbeck,
            n,
            (0..n).map(|j| coord(n, j)).collect(),
            field((0..n).map(v).collect()),
            GroupLaw::OrnsteinUhlenbeck { n },
            None,
            None,
            1,
        )
    }

    /// Heisenberg heat operator on `(x, y, s)` with a Kolmogorov drift `x ∂_w`.
    pub fn linked() -> Self {
        Self::builtin(
            ModelKind::Linked,
            4,
            vec![field(vec![c(1.0), c(0.0), v(1), c(0.0)]), field(vec![c(0.0), c(1.0), -v(0), c(0.0)])],
            field(vec![c(0.0), c(0.0), c(0.0), v(0)]),
            GroupLaw::Linked,
            Some(vec![1, 1, 2, 3, 2]),
            None,
            2,
        )
    }

    /// A user-assembled operator. Without a `law` the Euclidean law is used as
    /// carrier and the model is not treated as left invariant.
    pub fn custom(
        name: &str,
        generators: Vec<VectorField>,
        drift_x0: VectorField,
        law: Option<GroupLaw>,
    ) -> Result<Self> {
        let n = drift_x0.dim();
        if generators.is_empty() {
            return Err(Error::InvalidArgument("at least one generator is required".into()));
        }
        for g in &generators {
            if g.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
            }
        }
        if let Some(l) = law {
            if l.spatial_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: l.spatial_dim() });
            }
        }
        Ok(OperatorModel {
            kind: ModelKind::Custom,
            name: name.to_string(),
            n,
            generators,
            drift_x0,
            law: law.unwrap_or(GroupLaw::Euclidean { n }),
            left_invariant: law.is_some(),
            dilation: None,
            layers: None,
            hormander_order: None,
        })
    }

    /// Looks a model up by name. Accepts `heat`, `heat(3)`, `kolmogorov(2)`,
    /// `ou(2)` and the bare names of the remaining entries.
    pub fn by_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let (base, arg) = match name.split_once('(') {
            Some((b, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidArgument(format!("malformed model name `{name}`")))?;
                let k: usize = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("malformed model name `{name}`")))?;
                if k == 0 {
                    return Err(Error::InvalidArgument(format!("dimension must be ≥ 1 in `{name}`")));
                }
                (b.trim(), Some(k))
            }
            None => (name, None),
        };
        let fixed = |m: Self| match arg {
            None => Ok(m),
            Some(_) => Err(Error::InvalidArgument(format!("`{base}` takes no dimension"))),
        };
        match base {
            "heat" => Ok(Self::heat(arg.unwrap_or(2))),
            "kolmogorov" => Ok(Self::kolmogorov(arg.unwrap_or(1))),
            "ou" => Ok(Self::ou(arg.unwrap_or(1))),
            "heisenberg_heat" => fixed(Self::heisenberg_heat()),
            "mumford" => fixed(Self::mumford()),
            "cmp" => fixed(Self::cmp()),
            "grushin" => fixed(Self::grushin()),
            "grushin_lifted" => fixed(Self::grushin_lifted()),
            "linked" => fixed(Self::linked()),
            _ => Err(Error::InvalidArgument(format!("unknown model `{name}`"))),
        }
    }

    /// The nine builtin models with default dimensions.
    pub fn catalog() -> Vec<OperatorModel> {
        vec![
            Self::heat(2),
            Self::heisenberg_heat(),
            Self::kolmogorov(1),
            Self::mumford(),
            Self::cmp(),
            Self::grushin(),
            Self::grushin_lifted(),
            Self::ou(1),
            Self::linked(),
        ]
    }

    /// Catalog entry.
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Display name, including a non-default dimension.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Spatial dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators `m`.
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    /// Generator `X_j` on `R^N` (0-based).
    pub fn generator(&self, j: usize) -> &VectorField {
        &self.generators[j]
    }

    /// All generators.
    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    /// Generator `X_j` as a space-time field with zero time component.
    pub fn generator_spacetime(&self, j: usize) -> VectorField {
        self.generators[j].extended(0.0)
    }

    /// First-order part `X_0` on `R^N`.
    pub fn drift_x0(&self) -> &VectorField {
        &self.drift_x0
    }

    /// The drift `Y = X_0 − ∂_t` on `R^{N+1}`.
    pub fn drift(&self) -> VectorField {
        self.drift_x0.extended(-1.0)
    }

    /// `Σ ω_j X_j + Y` on `R^{N+1}`.
    pub fn control_field(&self, omega: &[f64]) -> Result<VectorField> {
        self.check_control(omega)?;
        let mut f = self.drift();
        for (j, w) in omega.iter().enumerate() {
            if *w != 0.0 {
                f = f.sum(&self.generator_spacetime(j).scaled(*w))?;
            }
        }
        Ok(f)
    }

    pub(crate) fn check_control(&self, omega: &[f64]) -> Result<()> {
        if omega.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: omega.len() });
        }
        Ok(())
    }

    pub(crate) fn check_point(&self, z: &Point) -> Result<()> {
        if z.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: z.dim() });
        }
        Ok(())
    }

    /// Group law.
    pub fn law(&self) -> GroupLaw {
        self.law
    }

    /// False for Grushin and for custom models without a declared law.
    pub fn is_left_invariant(&self) -> bool {
        self.left_invariant
    }

    /// Dilation group, for homogeneous models.
    pub fn dilation(&self) -> Option<&Dilation> {
        self.dilation.as_ref()
    }

    /// Stratification, for Carnot models.
    pub fn layers(&self) -> Option<&LayerStructure> {
        self.layers.as_ref()
    }

    /// Documented minimal bracket order at which the Hörmander condition holds
    /// (at every point, or off `x = 0` for Grushin).
    pub fn hormander_order(&self) -> Option<usize> {
        self.hormander_order
    }

    /// True when [`crate::reach::membership`] characterizes the attainable set.
    pub fn has_attainable_oracle(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::Mumford
                | ModelKind::Cmp
                | ModelKind::Heat
                | ModelKind::HeisenbergHeat
                | ModelKind::Grushin
                | ModelKind::GrushinLifted
        )
    }

    /// True for driftless models (`X_0 = 0`).
    pub fn is_driftless(&self) -> bool {
        self.drift_x0.is_zero()
    }

    /// True when a fundamental solution is available in [`crate::kernels`].
    pub fn has_kernel(&self) -> bool {
        matches!(self.kind, ModelKind::Heat | ModelKind::Kolmogorov)
    }

    /// True when [`crate::solver::extremal`] accepts this model.
    pub fn has_extremal_catalog(&self) -> bool {
        matches!(self.kind, ModelKind::Heat | ModelKind::HeisenbergHeat | ModelKind::Kolmogorov)
    }

    /// True when [`Self::exp_closed_form`] returns a value.
    pub fn has_closed_form_exp(&self) -> bool {
        self.kind != ModelKind::Custom
    }

    /// `exp(s(ω·X + Y)) z` in closed form, when one is known.
    ///
    /// Valid for any real `s`; the time coordinate is `t − s`.
    pub fn exp_closed_form(&self, omega: &[f64], s: f64, z: &Point) -> Option<Point> {
        if omega.len() != self.m() || z.dim() != self.n {
            return None;
        }
        let x = &z.spatial;
        let mut out = x.clone();
        match self.kind {
            ModelKind::Heat => {
                for j in 0..self.n {
                    out[j] += omega[j] * s;
                }
            }
            ModelKind::HeisenbergHeat => {
                let (a, b) = (omega[0], omega[1]);
                out[0] += a * s;
                out[1] += b * s;
                out[2] += 0.5 * s * (b * x[0] - a * x[1]);
            }
            ModelKind::Kolmogorov => {
                let m = self.m();
                for j in 0..m {
                    out[j] += omega[j] * s;
                    out[m + j] += s * x[j] + 0.5 * omega[j] * s * s;
                }
            }
            ModelKind::Mumford => {
                let w = omega[0];
                let mid = x[0] + 0.5 * s * w;
                let len = 2.0 * s * math::half_sinc(s * w);
                out[0] += w * s;
                out[1] += len * math::cos(mid);
                out[2] += len * math::sin(mid);
            }
            ModelKind::Cmp => {
                let w = omega[0];
                out[0] += w * s;
                out[1] += x[0] * x[0] * s + x[0] * w * s * s + w * w * s * s * s / 3.0;
                out[2] += x[0] * s + 0.5 * w * s * s;
            }
            ModelKind::Grushin => {
                let (a, b) = (omega[0], omega[1]);
                out[0] += a * s;
                out[1] += b * (x[0] * s + 0.5 * a * s * s);
            }
            ModelKind::GrushinLifted => {
                let (a, b) = (omega[0], omega[1]);
                out[0] += a * s;
                out[1] += b * (x[0] * s + 0.5 * a * s * s);
                out[2] += b * s;
            }
            ModelKind::OrnsteinUhlenbeck => {
                let e = math::exp(s);
                for j in 0..self.n {
                    out[j] = (x[j] + omega[j]) * e - omega[j];
                }
            }
            ModelKind::Linked => {
                let (a, b) = (omega[0], omega[1]);
                out[0] += a * s;
                out[1] += b * s;
                out[2] += s * (a * x[1] - b * x[0]);
                out[3] += x[0] * s + 0.5 * a * s * s;
            }
            ModelKind::Custom => return None,
        }
        Some(Point::new(out, z.time - s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_examples() {
        let heat = OperatorModel::heat(2);
        assert_eq!(heat.drift().eval(&[1.0, 2.0, 3.0]), vec![0.0, 0.0, -1.0]);
        let mum = OperatorModel::mumford();
        assert_eq!(mum.drift().eval(&[0.0, 4.0, 5.0, 6.0]), vec![0.0, 1.0, 0.0, -1.0]);
        let kol = OperatorModel::kolmogorov(1);
        assert_eq!(kol.drift().eval(&[2.0, 5.0, 0.0]), vec![0.0, 2.0, -1.0]);
    }

    #[test]
    fn catalog_has_nine_distinct_models() {
        let cat = OperatorModel::catalog();
        assert_eq!(cat.len(), 9);
        for (i, a) in cat.iter().enumerate() {
            for b in &cat[i + 1..] {
                assert_ne!(a.name(), b.name());
            }
            assert_eq!(a.law().spatial_dim(), a.n());
            if let Some(d) = a.dilation() {
                assert_eq!(d.exponents().len(), a.n() + 1);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for model in OperatorModel::catalog() {
            let again = OperatorModel::by_name(model.name()).unwrap();
            assert_eq!(again.kind(), model.kind());
            assert_eq!(again.n(), model.n());
        }
        assert_eq!(OperatorModel::by_name("heat(3)").unwrap().n(), 3);
        assert_eq!(OperatorModel::by_name("heat(3)").unwrap().name(), "heat(3)");
        assert_eq!(OperatorModel::by_name("kolmogorov(2)").unwrap().n(), 4);
        assert_eq!(OperatorModel::by_name("ou(2)").unwrap().name(), "ou(2)");
        assert!(OperatorModel::by_name("mumford(2)").is_err());
        assert!(OperatorModel::by_name("nope").is_err());
        assert!(OperatorModel::by_name("heat(0)").is_err());
    }

    #[test]
    fn closed_form_examples() {
        let mum = OperatorModel::mumford();
        let z = mum.exp_closed_form(&[1.0], core::f64::consts::FRAC_PI_2, &Point::origin(3)).unwrap();
        let want = [core::f64::consts::FRAC_PI_2, 1.0, 1.0];
        for (a, b) in z.spatial.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let cmp = OperatorModel::cmp();
        let z = cmp.exp_closed_form(&[0.0], 1.0, &Point::new(vec![1.0, 0.0, 0.0], 0.0)).unwrap();
        assert_eq!(z, Point::new(vec![1.0, 1.0, 1.0], -1.0));
        let kol = OperatorModel::kolmogorov(1);
        let z = kol.exp_closed_form(&[0.0], 1.0, &Point::new(vec![1.0, 0.0], 0.0)).unwrap();
        assert_eq!(z, Point::new(vec![1.0, 1.0], -1.0));
    }

    #[test]
    fn control_field_matches_sum() {
        let model = OperatorModel::linked();
        let f = model.control_field(&[2.0, -1.0]).unwrap();
        let p = [0.3, -0.7, 1.0, 2.0, 0.5];
        let got = f.eval(&p);
        // 2·X1 − X2 + Y
        let want = [2.0, -1.0, 2.0 * -0.7 + 0.3, 0.3, -1.0];
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(model.control_field(&[1.0]).is_err());
    }

    #[test]
    fn custom_model_validation() {
        let g = VectorField::coordinate(2, 0);
        let bad = VectorField::coordinate(3, 0);
        assert!(OperatorModel::custom("x", vec![bad], VectorField::zero(2), None).is_err());
        let ok = OperatorModel::custom("x", vec![g], VectorField::zero(2), None).unwrap();
        assert!(!ok.is_left_invariant());
        assert!(ok.exp_closed_form(&[1.0], 1.0, &Point::origin(2)).is_none());
    }
}
