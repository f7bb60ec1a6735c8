//! Refractive-index models, group index, wavevector expansions and bulk
//! spectral phase.
//!
//! Sellmeier models use the form `n²(λ) = 1 + Σ Bᵢ λ² / (λ² − Cᵢ)` with λ in
//! µm and Cᵢ in µm². A constant offset in `n²` is expressed as a term with
//! `C = 0`. All derivatives are closed-form; nothing here differentiates
//! numerically.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OmegaGrid;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a vacuum wavelength (m).
pub fn omega_from_wavelength(lambda_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda_m
}

/// Vacuum wavelength (m) of an angular frequency (rad/s).
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierTerm {
    pub b: f64,
    pub c_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexModel {
    Constant { n: f64 },
    Sellmeier { terms: Vec<SellmeierTerm> },
}

/// Definition as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDef {
    pub name: String,
    pub model: IndexModel,
    /// Inclusive validity range in µm.
    pub validity_um: [f64; 2],
}

/// A material with a validated dispersion model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaterialDef", into = "MaterialDef")]
pub struct DispersiveMaterial {
    name: String,
    model: IndexModel,
    validity_um: (f64, f64),
}

impl TryFrom<MaterialDef> for DispersiveMaterial {
    type Error = Error;

    fn try_from(def: MaterialDef) -> Result<Self> {
        Self::new(def.name, def.model, (def.validity_um[0], def.validity_um[1]))
    }
}

impl From<DispersiveMaterial> for MaterialDef {
    fn from(m: DispersiveMaterial) -> Self {
        MaterialDef {
            name: m.name,
            model: m.model,
            validity_um: [m.validity_um.0, m.validity_um.1],
        }
    }
}

/// Which part of the spectral phase to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Full,
    Even,
    Odd,
}

/// Taylor coefficients of k(ω) about ω0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseExpansion {
    pub omega0: f64,
    /// k(ω0), rad/m.
    pub k0: f64,
    /// dk/dω, s/m (inverse group velocity).
    pub alpha: f64,
    /// d²k/dω², s²/m.
    pub beta2: f64,
    /// d³k/dω³, s³/m.
    pub beta3: f64,
}

impl DispersiveMaterial {
    pub fn new(name: impl Into<String>, model: IndexModel, validity_um: (f64, f64)) -> Result<Self> {
        let name = name.into();
        let (lo, hi) = validity_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(Error::contract(format!(
                "material `{name}`: validity range [{lo}, {hi}] µm must be positive and increasing"
            )));
        }
        match &model {
            IndexModel::Constant { n } => {
                if !(n.is_finite() && *n >= 1.0) {
                    return Err(Error::contract(format!(
                        "material `{name}`: constant index must be finite and >= 1, got {n}"
                    )));
                }
            }
            IndexModel::Sellmeier { terms } => {
                if terms.is_empty() {
                    return Err(Error::contract(format!(
                        "material `{name}`: Sellmeier model needs at least one term"
                    )));
                }
                for t in terms {
                    if !(t.b.is_finite() && t.c_um2.is_finite()) {
                        return Err(Error::contract(format!(
                            "material `{name}`: Sellmeier coefficients must be finite"
                        )));
                    }
                    if t.c_um2 > 0.0 {
                        let pole = t.c_um2.sqrt();
                        if pole >= lo && pole <= hi {
                            return Err(Error::contract(format!(
                                "material `{name}`: Sellmeier pole at {pole:.4} µm lies inside \
                                 the validity range [{lo}, {hi}] µm"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self {
            name,
            model,
            validity_um,
        })
    }

    pub fn constant(name: impl Into<String>, n: f64) -> Result<Self> {
        Self::new(name, IndexModel::Constant { n }, (0.01, 1000.0))
    }

    pub fn sellmeier(
        name: impl Into<String>,
        terms: &[(f64, f64)],
        validity_um: (f64, f64),
    ) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|&(b, c_um2)| SellmeierTerm { b, c_um2 })
            .collect();
        Self::new(name, IndexModel::Sellmeier { terms }, validity_um)
    }

    pub fn vacuum() -> Self {
        Self::constant("vacuum", 1.0).expect("vacuum is valid")
    }

    /// Fused silica, three-term Sellmeier (Malitson).
    pub fn fused_silica() -> Self {
        Self::sellmeier(
            "fused-silica",
            &[
                (0.696_166_3, 0.068_404_3 * 0.068_404_3),
                (0.407_942_6, 0.116_241_4 * 0.116_241_4),
                (0.897_479_4, 9.896_161 * 9.896_161),
            ],
            (0.21, 6.7),
        )
        .expect("fused silica is valid")
    }

    /// Schott N-BK7.
    pub fn bk7() -> Self {
        Self::sellmeier(
            "bk7",
            &[
                (1.039_612_12, 0.006_000_698_67),
                (0.231_792_344, 0.020_017_914_4),
                (1.010_469_45, 103.560_653),
            ],
            (0.3, 2.5),
        )
        .expect("BK7 is valid")
    }

    /// Calcite, ordinary ray (Ghosh). The leading `C = 0` term carries the
    /// constant 0.73358749 of `n² = 1.73358749 + ...`.
    pub fn calcite_ordinary() -> Self {
        Self::sellmeier(
            "calcite-o",
            &[
                (0.733_587_49, 0.0),
                (0.964_643_45, 1.943_252_03e-2),
                (1.828_314_54, 120.0),
            ],
            (0.204, 2.172),
        )
        .expect("calcite is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &IndexModel {
        &self.model
    }

    /// Inclusive validity range in µm.
    pub fn validity_um(&self) -> (f64, f64) {
        self.validity_um
    }

    fn check_range(&self, lambda_um: f64) -> Result<()> {
        let (lo, hi) = self.validity_um;
        if lambda_um.is_finite() && lambda_um >= lo && lambda_um <= hi {
            Ok(())
        } else {
            Err(Error::Validity {
                material: self.name.clone(),
                wavelength_nm: lambda_um * 1e3,
                min_nm: lo * 1e3,
                max_nm: hi * 1e3,
            })
        }
    }

    /// `[n, dn/dλ, d²n/dλ², d³n/dλ³]` with λ in µm.
    fn index_derivatives_um(&self, lambda_um: f64) -> Result<[f64; 4]> {
        self.check_range(lambda_um)?;
        let d = match &self.model {
            IndexModel::Constant { n } => [*n, 0.0, 0.0, 0.0],
            IndexModel::Sellmeier { terms } => {
                let l = lambda_um;
                let l2 = l * l;
                let (mut u, mut u1, mut u2, mut u3) = (1.0, 0.0, 0.0, 0.0);
                for t in terms {
                    let den = l2 - t.c_um2;
                    u += t.b * l2 / den;
                    let bc = t.b * t.c_um2;
                    if bc != 0.0 {
                        let d2 = den * den;
                        let d3 = d2 * den;
                        u1 += bc * (-2.0 * l / d2);
                        u2 += bc * (-2.0 / d2 + 8.0 * l2 / d3);
                        u3 += bc * (24.0 * l / d3 - 48.0 * l2 * l / (d3 * den));
                    }
                }
                if !(u.is_finite() && u >= 1.0) {
                    return Err(Error::contract(format!(
                        "material `{}`: n² = {u} at {:.2} nm is not a valid index",
                        self.name,
                        lambda_um * 1e3
                    )));
                }
                let n = u.sqrt();
                let n1 = u1 / (2.0 * n);
                let n2 = (u2 - 2.0 * n1 * n1) / (2.0 * n);
                let n3 = (u3 - 6.0 * n1 * n2) / (2.0 * n);
                [n, n1, n2, n3]
            }
        };
        Ok(d)
    }

    /// Phase index at a vacuum wavelength in metres.
    pub fn refractive_index(&self, lambda_m: f64) -> Result<f64> {
        Ok(self.index_derivatives_um(lambda_m * 1e6)?[0])
    }

    /// dn/dλ in 1/m.
    pub fn index_slope(&self, lambda_m: f64) -> Result<f64> {
        Ok(self.index_derivatives_um(lambda_m * 1e6)?[1] * 1e6)
    }

    /// Group index `n − λ dn/dλ`.
    pub fn group_index(&self, lambda_m: f64) -> Result<f64> {
        let l = lambda_m * 1e6;
        let [n, n1, ..] = self.index_derivatives_um(l)?;
        Ok(n - l * n1)
    }

    /// Wavevector k(ω) = n ω / c in rad/m.
    pub fn wavenumber(&self, omega: f64) -> Result<f64> {
        let n = self.refractive_index(wavelength_from_omega(omega))?;
        Ok(n * omega / SPEED_OF_LIGHT)
    }

    /// k and its first three ω-derivatives at ω0, by the chain rule through
    /// λ(ω) = 2πc/ω applied to the closed-form λ-derivatives of n.
    pub fn phase_expansion(&self, omega0: f64) -> Result<PhaseExpansion> {
        let l = wavelength_from_omega(omega0) * 1e6;
        let [n, n1, n2, n3] = self.index_derivatives_um(l)?;
        let w = omega0;
        let l1 = -l / w;
        let l2 = 2.0 * l / (w * w);
        let l3 = -6.0 * l / (w * w * w);
        let nw1 = n1 * l1;
        let nw2 = n2 * l1 * l1 + n1 * l2;
        let nw3 = n3 * l1 * l1 * l1 + 3.0 * n2 * l1 * l2 + n1 * l3;
        let c = SPEED_OF_LIGHT;
        Ok(PhaseExpansion {
            omega0,
            k0: n * w / c,
            alpha: (n + w * nw1) / c,
            beta2: (2.0 * nw1 + w * nw2) / c,
            beta3: (3.0 * nw2 + w * nw3) / c,
        })
    }

    /// Spectral phase φ(Ω) = k(ω0+Ω)·length on a symmetric grid, or its
    /// even/odd part.
    pub fn spectral_phase(
        &self,
        length_m: f64,
        omega0: f64,
        grid: &OmegaGrid,
        parity: Parity,
    ) -> Result<Vec<f64>> {
        let full = (0..grid.len())
            .map(|j| Ok(self.wavenumber(omega0 + grid.value(j))? * length_m))
            .collect::<Result<Vec<f64>>>()?;
        Ok(match parity {
            Parity::Full => full,
            Parity::Even => (0..grid.len())
                .map(|j| 0.5 * (full[j] + full[grid.mirror(j)]))
                .collect(),
            Parity::Odd => (0..grid.len())
                .map(|j| 0.5 * (full[j] - full[grid.mirror(j)]))
                .collect(),
        })
    }
}

/// Named materials: the built-in set plus user definitions.
#[derive(Debug, Clone)]
pub struct MaterialRegistry {
    materials: BTreeMap<String, DispersiveMaterial>,
}

impl Default for MaterialRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MaterialRegistry {
    pub fn builtin() -> Self {
        let mut materials = BTreeMap::new();
        for m in [
            DispersiveMaterial::vacuum(),
            DispersiveMaterial::fused_silica(),
            DispersiveMaterial::bk7(),
            DispersiveMaterial::calcite_ordinary(),
        ] {
            materials.insert(m.name().to_string(), m);
        }
        Self { materials }
    }

    /// Adds or replaces a material.
    pub fn insert(&mut self, material: DispersiveMaterial) {
        self.materials.insert(material.name().to_string(), material);
    }

    pub fn get(&self, name: &str) -> Result<&DispersiveMaterial> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &DispersiveMaterial> {
        self.materials.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NM: f64 = 1e-9;

    fn fd_group_index(m: &DispersiveMaterial, lambda: f64) -> f64 {
        let h = 0.1 * NM;
        let n = m.refractive_index(lambda).unwrap();
        let dn = (m.refractive_index(lambda + h).unwrap() - m.refractive_index(lambda - h).unwrap())
            / (2.0 * h);
        n - lambda * dn
    }

    #[test]
    fn constant_index_is_flat() {
        let m = DispersiveMaterial::constant("glass", 1.5).unwrap();
        assert_eq!(m.refractive_index(700.0 * NM).unwrap(), 1.5);
        assert_eq!(m.group_index(700.0 * NM).unwrap(), 1.5);
        let p = m.phase_expansion(omega_from_wavelength(700.0 * NM)).unwrap();
        assert!((p.alpha * SPEED_OF_LIGHT - 1.5).abs() < 1e-15);
        assert_eq!(p.beta2, 0.0);
    }

    #[test]
    fn fused_silica_at_sodium_d() {
        let n = DispersiveMaterial::fused_silica()
            .refractive_index(587.6 * NM)
            .unwrap();
        assert!((n - 1.4585).abs() < 1e-4, "n = {n}");
    }

    #[test]
    fn out_of_range_is_validity_error() {
        let err = DispersiveMaterial::fused_silica()
            .refractive_index(50.0 * NM)
            .unwrap_err();
        assert!(matches!(err, Error::Validity { .. }));
        assert!(err.to_string().contains("210.0"));
    }

    #[test]
    fn analytic_group_index_matches_finite_difference() {
        for m in [
            DispersiveMaterial::fused_silica(),
            DispersiveMaterial::bk7(),
            DispersiveMaterial::calcite_ordinary(),
        ] {
            for lam in [450.0, 632.8, 790.0, 1064.0] {
                let a = m.group_index(lam * NM).unwrap();
                let f = fd_group_index(&m, lam * NM);
                assert!(((a - f) / a).abs() < 1e-6, "{} at {lam}: {a} vs {f}", m.name());
            }
        }
    }

    #[test]
    fn normal_dispersion_raises_group_index() {
        for m in [DispersiveMaterial::fused_silica(), DispersiveMaterial::calcite_ordinary()] {
            let l = 790.0 * NM;
            assert!(m.index_slope(l).unwrap() < 0.0);
            assert!(m.group_index(l).unwrap() > m.refractive_index(l).unwrap());
        }
    }

    #[test]
    fn alpha_matches_group_index() {
        for m in [
            DispersiveMaterial::fused_silica(),
            DispersiveMaterial::bk7(),
            DispersiveMaterial::calcite_ordinary(),
        ] {
            let l = 790.8 * NM;
            let p = m.phase_expansion(omega_from_wavelength(l)).unwrap();
            let ng = m.group_index(l).unwrap();
            assert!((p.alpha * SPEED_OF_LIGHT / ng - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_expansion_matches_finite_differences_of_k() {
        let m = DispersiveMaterial::calcite_ordinary();
        let w0 = omega_from_wavelength(790.0 * NM);
        let p = m.phase_expansion(w0).unwrap();
        let h = w0 * 2e-4;
        let k = |d: f64| m.wavenumber(w0 + d).unwrap();
        let b2 = (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
        let b3 = (k(2.0 * h) - 2.0 * k(h) + 2.0 * k(-h) - k(-2.0 * h)) / (2.0 * h * h * h);
        assert!(p.beta2 > 0.0);
        assert!((p.beta2 / b2 - 1.0).abs() < 1e-4, "{} vs {b2}", p.beta2);
        assert!((p.beta3 / b3 - 1.0).abs() < 1e-2, "{} vs {b3}", p.beta3);
    }

    #[test]
    fn vacuum_phase_is_linear() {
        let w0 = omega_from_wavelength(800.0 * NM);
        let g = OmegaGrid::new(65, 1e12).unwrap();
        let phi = DispersiveMaterial::vacuum()
            .spectral_phase(1.0, w0, &g, Parity::Full)
            .unwrap();
        for (j, p) in phi.iter().enumerate() {
            let expect = (w0 + g.value(j)) / SPEED_OF_LIGHT;
            assert!((p - expect).abs() <= 1e-15 * expect);
        }
        let zero = DispersiveMaterial::bk7()
            .spectral_phase(0.0, w0, &g, Parity::Full)
            .unwrap();
        assert!(zero.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn parity_split_recombines() {
        let m = DispersiveMaterial::calcite_ordinary();
        let w0 = omega_from_wavelength(790.0 * NM);
        let g = OmegaGrid::new(257, 1e12).unwrap();
        let full = m.spectral_phase(0.08, w0, &g, Parity::Full).unwrap();
        let even = m.spectral_phase(0.08, w0, &g, Parity::Even).unwrap();
        let odd = m.spectral_phase(0.08, w0, &g, Parity::Odd).unwrap();
        for j in 0..g.len() {
            assert!((even[j] + odd[j] - full[j]).abs() <= 1e-12 * full[j].abs());
            assert_eq!(even[j], even[g.mirror(j)]);
            assert_eq!(odd[j], -odd[g.mirror(j)]);
        }
    }

    #[test]
    fn pole_inside_validity_is_rejected() {
        let r = DispersiveMaterial::sellmeier("bad", &[(1.0, 0.64)], (0.5, 1.0));
        assert!(r.is_err());
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let json = r#"{"name":"g","model":{"kind":"sellmeier","terms":[{"b":1.0,"c_um2":0.01}]},"validity_um":[0.3,2.0]}"#;
        let m: DispersiveMaterial = serde_json::from_str(json).unwrap();
        assert_eq!(m.name(), "g");
        let bad = r#"{"name":"g","model":{"kind":"constant","n":1.5,"x":1},"validity_um":[0.3,2.0]}"#;
        assert!(serde_json::from_str::<DispersiveMaterial>(bad).is_err());
    }

    #[test]
    fn registry_contains_builtins() {
        let r = MaterialRegistry::builtin();
        for name in ["vacuum", "fused-silica", "bk7", "calcite-o"] {
            assert!(r.get(name).is_ok());
        }
        assert!(matches!(r.get("unobtainium"), Err(Error::UnknownMaterial(_))));
    }
}
