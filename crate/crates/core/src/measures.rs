//! Spectral measures attached to a Herglotz function.
//!
//! `ρ` is read off `H` by Stieltjes inversion: on a piece where `0 < ξ < 1`
//! the density is `|H(t)| sin(πξ) / π`, and every breakpoint where ξ steps
//! from 0 up to 1 carries an atom. Half-line measures are `ν₊ = f ρ` with
//! `f = 1/2` on `K` and `0 ≤ f ≤ 1` elsewhere.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gap_flow::{check_half_on, CompactSet};
use crate::krein::HerglotzRep;
use crate::quadrature::{adaptive_panels, integrate_arcsine, Adaptive, ArcsineMap, GaussRule, Located};

/// An absolutely continuous piece with density
/// `multiplier * |H(t)| sin(πξ(t)) / π` on `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcPiece {
    pub lo: f64,
    pub hi: f64,
    pub multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// A finite measure: closed-form ac pieces bound to a Herglotz
/// representation plus point masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectralMeasureJson", into = "SpectralMeasureJson")]
pub struct SpectralMeasure {
    rep: Option<HerglotzRep>,
    ac_pieces: Vec<AcPiece>,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct SpectralMeasureJson {
    rep: Option<HerglotzRep>,
    ac_pieces: Vec<AcPiece>,
    atoms: Vec<Atom>,
}

impl TryFrom<SpectralMeasureJson> for SpectralMeasure {
    type Error = Error;
    fn try_from(j: SpectralMeasureJson) -> Result<Self> {
        SpectralMeasure::new(j.rep, j.ac_pieces, j.atoms)
    }
}

impl From<SpectralMeasure> for SpectralMeasureJson {
    fn from(m: SpectralMeasure) -> Self {
        SpectralMeasureJson {
            rep: m.rep,
            ac_pieces: m.ac_pieces,
            atoms: m.atoms,
        }
    }
}

impl SpectralMeasure {
    pub fn new(rep: Option<HerglotzRep>, mut ac_pieces: Vec<AcPiece>, mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !(a.mass > 0.0 && a.mass.is_finite() && a.position.is_finite())) {
            return invalid("atom masses must be positive and finite");
        }
        ac_pieces.retain(|p| p.multiplier != 0.0);
        if !ac_pieces.is_empty() {
            let Some(rep) = rep.as_ref() else {
                return invalid("ac pieces need a Herglotz representation");
            };
            for p in &ac_pieces {
                if !(p.lo < p.hi) || !(p.multiplier > 0.0 && p.multiplier.is_finite()) {
                    return invalid(format!("bad ac piece {p:?}"));
                }
                // each piece must sit inside a single piece of ξ
                let inside = rep.xi.pieces().any(|q| q.lo <= p.lo && p.hi <= q.hi);
                if !inside {
                    return invalid(format!("ac piece ({}, {}) straddles a breakpoint of ξ", p.lo, p.hi));
                }
            }
        }
        ac_pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if ac_pieces.windows(2).any(|w| w[0].hi > w[1].lo) {
            return invalid("ac pieces overlap");
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(SpectralMeasure { rep, ac_pieces, atoms })
    }

    /// A purely atomic measure.
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        SpectralMeasure::new(None, Vec::new(), atoms)
    }

    pub fn rep(&self) -> Option<&HerglotzRep> {
        self.rep.as_ref()
    }

    pub fn ac_pieces(&self) -> &[AcPiece] {
        &self.ac_pieces
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_atomic(&self) -> bool {
        self.ac_pieces.is_empty()
    }

    /// Density of an ac piece at `t`.
    pub fn density(&self, piece: &AcPiece, t: f64) -> f64 {
        match &self.rep {
            Some(rep) => {
                let v = rep.xi.eval(0.5 * (piece.lo + piece.hi));
                piece.multiplier * rep.modulus(t) * (PI * v).sin() / PI
            }
            None => 0.0,
        }
    }

    fn density_fn<'a>(&'a self, piece: &'a AcPiece) -> impl Fn(Located) -> f64 + 'a {
        let rep = self.rep.as_ref().expect("validated: ac pieces carry a rep");
        let v = rep.xi.eval(0.5 * (piece.lo + piece.hi));
        let scale = piece.multiplier * (PI * v).sin() / PI;
        move |p| scale * rep.modulus_located(&p)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return invalid("scale factor must be positive");
        }
        SpectralMeasure::new(
            self.rep.clone(),
            self.ac_pieces
                .iter()
                .map(|p| AcPiece {
                    multiplier: p.multiplier * factor,
                    ..*p
                })
                .collect(),
            self.atoms
                .iter()
                .map(|a| Atom {
                    mass: a.mass * factor,
                    ..*a
                })
                .collect(),
        )
    }

    pub fn with_atoms(&self, extra: &[Atom]) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(extra);
        SpectralMeasure::new(self.rep.clone(), self.ac_pieces.clone(), atoms)
    }

    /// Number of support points available to a discretization with the
    /// given rule size, or `None` when the support is infinite.
    pub fn support_size(&self) -> Option<usize> {
        self.is_atomic().then_some(self.atoms.len())
    }
}

/// Selection function `f` of the correspondence `ν₊ = f ρ` off `K`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FSelector {
    #[serde(default)]
    pub intervals: Vec<FInterval>,
    #[serde(default)]
    pub atoms: Vec<FAtom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FInterval {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FAtom {
    pub position: f64,
    pub weight: f64,
}

impl FSelector {
    /// `f = 0` off `K`.
    pub fn zero() -> Self {
        FSelector::default()
    }

    /// `f = value` on every ac piece of `rho` off `K` and on every atom.
    pub fn constant(rho: &SpectralMeasure, set: &CompactSet, value: f64) -> Self {
        let mut intervals = Vec::new();
        for p in rho.ac_pieces() {
            let mut cuts = vec![p.lo];
            for &(c, d) in set.intervals() {
                for x in [c, d] {
                    if x > p.lo && x < p.hi {
                        cuts.push(x);
                    }
                }
            }
            cuts.push(p.hi);
            for w in cuts.windows(2) {
                if !set.contains_interior(0.5 * (w[0] + w[1])) {
                    intervals.push(FInterval {
                        lo: w[0],
                        hi: w[1],
                        value,
                    });
                }
            }
        }
        let atoms = rho
            .atoms()
            .iter()
            .map(|a| FAtom {
                position: a.position,
                weight: value,
            })
            .collect();
        FSelector { intervals, atoms }
    }

    pub fn validate(&self, set: &CompactSet) -> Result<()> {
        for i in &self.intervals {
            if !(i.lo < i.hi) || !(0.0..=1.0).contains(&i.value) {
                return invalid(format!("bad f interval {i:?}"));
            }
            if set.overlap(i.lo, i.hi) > 0.0 {
                return invalid(format!("f interval ({}, {}) overlaps K; f is fixed to 1/2 there", i.lo, i.hi));
            }
        }
        for a in &self.atoms {
            if !(0.0..=1.0).contains(&a.weight) {
                return invalid(format!("bad atom weight {a:?}"));
            }
        }
        Ok(())
    }

    fn value_at(&self, t: f64) -> f64 {
        self.intervals
            .iter()
            .find(|i| i.lo <= t && t <= i.hi)
            .map_or(0.0, |i| i.value)
    }

    /// Total `f`-weighted mass taken off `K`.
    pub fn selected_mass(&self, rho: &SpectralMeasure, set: &CompactSet) -> Result<f64> {
        let nu = nu_plus(rho, set, self)?;
        let base = nu_plus(rho, set, &FSelector::zero())?;
        Ok(total_mass(&nu)? - total_mass(&base)?)
    }
}

fn position_tol(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

/// Measure of `H` by Stieltjes inversion, in closed form.
pub fn rho_from_herglotz(rep: &HerglotzRep) -> Result<SpectralMeasure> {
    let xi = &rep.xi;
    let r = xi.bound();
    let values = xi.values();
    let bps = xi.breakpoints();
    let m = values.len();
    let mut ac = Vec::new();
    for (i, p) in xi.pieces().enumerate() {
        if p.value > 0.0 && p.value < 1.0 {
            // local exponents of |H| at the two ends
            let left = if i == 0 { 1.0 } else { values[i - 1] };
            let right = if i + 1 == m { 0.0 } else { values[i + 1] };
            for (x, e) in [(p.lo, left - p.value), (p.hi, p.value - right)] {
                if e <= -1.0 {
                    return Err(Error::Singular {
                        x,
                        reason: format!("density exponent {e} is not integrable"),
                    });
                }
            }
            ac.push(AcPiece {
                lo: p.lo,
                hi: p.hi,
                multiplier: 1.0,
            });
        }
    }
    let mut atoms = Vec::new();
    for k in 1..m {
        if values[k - 1] == 0.0 && values[k] == 1.0 {
            let x0 = bps[k];
            // |H(x)| = (x + R) Π |x_j - x|^{w_j}; the jump at x0 has w = -1
            let mut log = (x0 + r).ln();
            for (xj, w) in xi.jump_weights() {
                if xj != x0 {
                    log += w * (xj - x0).abs().ln();
                }
            }
            atoms.push(Atom {
                position: x0,
                mass: log.exp(),
            });
        } else if values[k] - values[k - 1] >= 1.0 {
            return Err(Error::Singular {
                x: bps[k],
                reason: "unit up-jump that is not 0 -> 1".into(),
            });
        }
    }
    SpectralMeasure::new(Some(rep.clone()), ac, atoms)
}

/// Half-line measure `ν₊ = (1/2) χ_K ρ_ac + f ρ|_{K^c}`.
pub fn nu_plus(rho: &SpectralMeasure, set: &CompactSet, f: &FSelector) -> Result<SpectralMeasure> {
    f.validate(set)?;
    if let Some(rep) = rho.rep() {
        check_half_on(&rep.xi, set)?;
    }
    let mut pieces = Vec::new();
    for p in rho.ac_pieces() {
        let mut cuts = vec![p.lo, p.hi];
        for &(c, d) in set.intervals() {
            cuts.extend([c, d]);
        }
        for i in &f.intervals {
            cuts.extend([i.lo, i.hi]);
        }
        cuts.retain(|&x| x >= p.lo && x <= p.hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let weight = if set.contains_interior(mid) {
                0.5
            } else {
                f.value_at(mid)
            };
            if weight > 0.0 {
                pieces.push(AcPiece {
                    lo: w[0],
                    hi: w[1],
                    multiplier: p.multiplier * weight,
                });
            }
        }
    }
    for fa in &f.atoms {
        if !rho
            .atoms()
            .iter()
            .any(|a| (a.position - fa.position).abs() <= position_tol(a.position))
        {
            return invalid(format!("f weight given for {} but rho has no atom there", fa.position));
        }
    }
    let mut atoms = Vec::new();
    for a in rho.atoms() {
        if set.contains(a.position) {
            return invalid(format!("atom at {} lies on K", a.position));
        }
        let weight = f
            .atoms
            .iter()
            .find(|fa| (a.position - fa.position).abs() <= position_tol(a.position))
            .map_or(0.0, |fa| fa.weight);
        if weight > 0.0 {
            atoms.push(Atom {
                position: a.position,
                mass: a.mass * weight,
            });
        }
    }
    SpectralMeasure::new(rho.rep().cloned(), pieces, atoms)
}

/// Total mass with an error estimate for the ac part.
pub fn total_mass_estimate(m: &SpectralMeasure, cfg: Adaptive) -> Result<(f64, f64)> {
    let mut value: f64 = m.atoms().iter().map(|a| a.mass).sum();
    let mut error = 0.0;
    for p in m.ac_pieces() {
        let est = integrate_arcsine(m.density_fn(p), p.lo, p.hi, cfg)?;
        value += est.value;
        error += est.error;
    }
    Ok((value, error))
}

/// `m(ℝ)`; for a half-line spectral measure this is `a₀²`.
pub fn total_mass(m: &SpectralMeasure) -> Result<f64> {
    Ok(total_mass_estimate(m, Adaptive::default())?.0)
}

/// `∫ t^k dm` for `k = 0..=k_max`.
pub fn moments(m: &SpectralMeasure, k_max: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; k_max + 1];
    for a in m.atoms() {
        let mut pw = 1.0;
        for mk in out.iter_mut() {
            *mk += a.mass * pw;
            pw *= a.position;
        }
    }
    for p in m.ac_pieces() {
        let density = m.density_fn(p);
        for (k, mk) in out.iter_mut().enumerate() {
            let est = integrate_arcsine(|q| q.x().powi(k as i32) * density(q), p.lo, p.hi, Adaptive::default())?;
            *mk += est.value;
        }
    }
    Ok(out)
}

/// Replaces every ac piece by a composite Gauss-Legendre rule in the
/// arcsine variable with at least `points_per_piece` nodes. Panels follow
/// the adaptive partition of the density; weights are rescaled so each
/// piece keeps its mass.
pub fn quadrature_discretize(m: &SpectralMeasure, points_per_piece: usize) -> Result<SpectralMeasure> {
    if points_per_piece == 0 {
        return invalid("points_per_piece must be at least 1");
    }
    let mut atoms = m.atoms().to_vec();
    let cfg = Adaptive::default().with_rel_tol(1e-13);
    for p in m.ac_pieces() {
        let map = ArcsineMap::new(p.lo, p.hi);
        let g = map.pullback(m.density_fn(p));
        let panels = adaptive_panels(&g, ArcsineMap::THETA_LO, ArcsineMap::THETA_HI, cfg)?;
        let mass: f64 = panels.iter().map(|q| q.value).sum();
        let per_panel = points_per_piece.div_ceil(panels.len()).max(10);
        let rule = GaussRule::legendre(per_panel);
        let mut nodes = Vec::with_capacity(panels.len() * per_panel);
        for q in &panels {
            let half = 0.5 * (q.hi - q.lo);
            let mid = 0.5 * (q.hi + q.lo);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let theta = mid + half * x;
                let weight = w * half * g(theta);
                if weight > 0.0 {
                    nodes.push(Atom {
                        position: map.point(theta),
                        mass: weight,
                    });
                }
            }
        }
        let sum: f64 = nodes.iter().map(|a| a.mass).sum();
        if !(sum > 0.0) {
            continue;
        }
        let fix = mass / sum;
        atoms.extend(nodes.into_iter().map(|a| Atom {
            mass: a.mass * fix,
            ..a
        }));
    }
    SpectralMeasure::atomic(atoms)
}

/// Writes `node,weight` rows of an atomic measure.
pub fn write_nodes_csv<W: Write>(m: &SpectralMeasure, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(["node", "weight"]).map_err(io)?;
    for a in m.atoms() {
        w.write_record([format!("{:.17e}", a.position), format!("{:.17e}", a.mass)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::{xi_free, StepFunction};

    fn semicircle() -> SpectralMeasure {
        let rho = rho_from_herglotz(&HerglotzRep::new(xi_free(2.0).unwrap())).unwrap();
        nu_plus(&rho, &CompactSet::interval(-2.0, 2.0).unwrap(), &FSelector::zero()).unwrap()
    }

    #[test]
    fn free_rho_is_semicircle_without_atoms() {
        let rho = rho_from_herglotz(&HerglotzRep::new(xi_free(3.0).unwrap())).unwrap();
        assert!(rho.atoms().is_empty());
        assert_eq!(rho.ac_pieces().len(), 1);
        let p = rho.ac_pieces()[0];
        for t in [-1.5f64, 0.0, 0.3, 1.9] {
            let exact = (4.0 - t * t).sqrt() / PI;
            assert!((rho.density(&p, t) - exact).abs() < 1e-14);
        }
        assert!((total_mass(&rho).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn full_pieces_carry_no_ac_mass() {
        let xi = StepFunction::from_pieces(3.0, &[(-3.0, 0.0, 1.0), (0.0, 3.0, 0.0)]).unwrap();
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        assert!(rho.ac_pieces().is_empty());
        assert!(rho.atoms().is_empty());
    }

    #[test]
    fn semicircle_mass_and_catalan_moments() {
        let nu = semicircle();
        assert!((total_mass(&nu).unwrap() - 1.0).abs() < 1e-12);
        let mo = moments(&nu, 6).unwrap();
        let catalan = [1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0];
        for (a, b) in mo.iter().zip(catalan) {
            assert!((a - b).abs() < 1e-11, "{mo:?}");
        }
    }

    #[test]
    fn atom_mass_and_moments() {
        let m = SpectralMeasure::atomic(vec![Atom { position: 0.0, mass: 4.0 }]).unwrap();
        assert_eq!(total_mass(&m).unwrap(), 4.0);
        let m = SpectralMeasure::atomic(vec![Atom { position: 1.5, mass: 0.5 }]).unwrap();
        let mo = moments(&m, 4).unwrap();
        for (k, v) in mo.iter().enumerate() {
            assert!((v - 0.5 * 1.5f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn gap_jump_produces_atom() {
        let k = CompactSet::new(vec![(-2.0, 0.0), (1.0, 2.0)]).unwrap();
        let xi = crate::gap_flow::CanonicalKrein::from_jumps(&k, 3.0, &[0.3]).unwrap();
        let rho = rho_from_herglotz(&HerglotzRep::new(xi.into_xi())).unwrap();
        assert_eq!(rho.atoms().len(), 1);
        assert!((rho.atoms()[0].position - 0.7).abs() < 1e-15);
        assert!(rho.atoms()[0].mass > 0.0);
    }

    #[test]
    fn f_scales_atoms_and_drops_zeros() {
        let k = CompactSet::interval(-2.0, 2.0).unwrap();
        let xi = xi_free(4.0)
            .unwrap()
            .splice(2.0, 4.0, &[(2.0, 3.0, 0.0), (3.0, 3.5, 1.0), (3.5, 4.0, 0.0)])
            .unwrap();
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        let m = rho.atoms()[0].mass;
        let f = FSelector {
            intervals: vec![],
            atoms: vec![FAtom { position: 3.0, weight: 0.5 }],
        };
        let nu = nu_plus(&rho, &k, &f).unwrap();
        assert_eq!(nu.atoms().len(), 1);
        assert!((nu.atoms()[0].mass - 0.5 * m).abs() < 1e-15);
        let nu0 = nu_plus(&rho, &k, &FSelector::zero()).unwrap();
        assert!(nu0.atoms().is_empty());
        let diff = total_mass(&nu).unwrap() - total_mass(&nu0).unwrap();
        assert!((diff - 0.5 * m).abs() < 1e-12);
    }

    #[test]
    fn f_overlapping_k_is_rejected() {
        let k = CompactSet::interval(-2.0, 2.0).unwrap();
        let rho = rho_from_herglotz(&HerglotzRep::new(xi_free(3.0).unwrap())).unwrap();
        let f = FSelector {
            intervals: vec![FInterval { lo: 1.0, hi: 2.5, value: 0.3 }],
            atoms: vec![],
        };
        assert!(nu_plus(&rho, &k, &f).is_err());
    }

    #[test]
    fn discretization_preserves_mass_and_moments() {
        let nu = semicircle();
        let d = quadrature_discretize(&nu, 200).unwrap();
        assert!(d.is_atomic());
        assert!(d.atoms().len() >= 200);
        assert!((total_mass(&d).unwrap() - 1.0).abs() < 1e-12);
        let exact = moments(&nu, 20).unwrap();
        let disc = moments(&d, 20).unwrap();
        for (a, b) in exact.iter().zip(&disc) {
            assert!((a - b).abs() < 1e-10);
        }
        let atoms = SpectralMeasure::atomic(vec![Atom { position: 0.1, mass: 1.0 }]).unwrap();
        assert_eq!(quadrature_discretize(&atoms, 50).unwrap(), atoms);
    }

    #[test]
    fn json_roundtrip_and_csv() {
        let nu = semicircle().with_atoms(&[Atom { position: 3.0, mass: 0.2 }]).unwrap();
        let s = serde_json::to_string(&nu).unwrap();
        let back: SpectralMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, nu);
        let mut buf = Vec::new();
        write_nodes_csv(&SpectralMeasure::atomic(vec![Atom { position: 1.0, mass: 2.0 }]).unwrap(), &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("node,weight\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
