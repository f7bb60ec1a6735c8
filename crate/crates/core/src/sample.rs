//! Layered samples and their sampled reflection transfer function H(Ω).
//!
//! A stack is an ordered list of reflecting interfaces separated by gaps of
//! dispersive material. Only single-bounce terms are kept:
//!
//! ```text
//! H(ω) = Σ_j r_j · exp(i · 2 · Σ_{m<j} k_m(ω) d_m)
//! ```
//!
//! An optional bulk element (e.g. calcite blocks in the sample arm) multiplies
//! the whole response by `exp(i · passes · k(ω) · L)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::OmegaGrid;
use crate::materials::{DispersiveMaterial, SPEED_OF_LIGHT};

/// Reflecting interface with complex amplitude `r`, `|r| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    r: Complex64,
}

impl Interface {
    pub fn new(r: Complex64) -> Result<Self> {
        if !(r.re.is_finite() && r.im.is_finite()) || r.norm() > 1.0 {
            return Err(Error::contract(format!(
                "reflection amplitude {r} must be finite with |r| <= 1"
            )));
        }
        Ok(Self { r })
    }

    pub fn real(r: f64) -> Result<Self> {
        Self::new(Complex64::new(r, 0.0))
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub thickness_m: f64,
    pub material: DispersiveMaterial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BulkElement {
    pub material: DispersiveMaterial,
    pub length_m: f64,
    pub passes: u32,
}

impl BulkElement {
    pub fn new(material: DispersiveMaterial, length_m: f64, passes: u32) -> Result<Self> {
        if !(length_m.is_finite() && length_m >= 0.0) {
            return Err(Error::contract(format!(
                "bulk length must be finite and >= 0, got {length_m}"
            )));
        }
        if passes == 0 {
            return Err(Error::contract("bulk passes must be a positive integer"));
        }
        Ok(Self {
            material,
            length_m,
            passes,
        })
    }

    /// Group delay added by the element at ω0, in seconds.
    pub fn group_delay(&self, omega0: f64) -> Result<f64> {
        let p = self.material.phase_expansion(omega0)?;
        Ok(self.passes as f64 * self.length_m * p.alpha)
    }

    /// exp(i · passes · k(ω) · L)
    pub fn factor(&self, omega: f64) -> Result<Complex64> {
        if self.length_m == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let phase = self.passes as f64 * self.material.wavenumber(omega)? * self.length_m;
        Ok(Complex64::from_polar(1.0, phase))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    interfaces: Vec<Interface>,
    gaps: Vec<Gap>,
    bulk: Option<BulkElement>,
}

impl LayerStack {
    pub fn new(interfaces: Vec<Interface>, gaps: Vec<Gap>) -> Result<Self> {
        if interfaces.is_empty() {
            return Err(Error::contract("layer stack needs at least one interface"));
        }
        if gaps.len() + 1 != interfaces.len() {
            return Err(Error::contract(format!(
                "layer stack with {} interfaces needs {} gaps, got {}",
                interfaces.len(),
                interfaces.len() - 1,
                gaps.len()
            )));
        }
        if let Some(g) = gaps.iter().find(|g| !(g.thickness_m.is_finite() && g.thickness_m >= 0.0)) {
            return Err(Error::contract(format!(
                "gap thickness must be finite and >= 0, got {}",
                g.thickness_m
            )));
        }
        Ok(Self {
            interfaces,
            gaps,
            bulk: None,
        })
    }

    /// A single reflecting surface (mirror).
    pub fn mirror(r: f64) -> Result<Self> {
        Self::new(vec![Interface::real(r)?], Vec::new())
    }

    /// Two surfaces bounding a slab of thickness `d_m`.
    pub fn slab(r1: f64, r2: f64, d_m: f64, material: DispersiveMaterial) -> Result<Self> {
        Self::new(
            vec![Interface::real(r1)?, Interface::real(r2)?],
            vec![Gap {
                thickness_m: d_m,
                material,
            }],
        )
    }

    pub fn with_bulk(mut self, bulk: BulkElement) -> Self {
        self.bulk = Some(bulk);
        self
    }

    pub fn without_bulk(&self) -> Self {
        Self {
            bulk: None,
            ..self.clone()
        }
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn bulk(&self) -> Option<&BulkElement> {
        self.bulk.as_ref()
    }

    /// Σ_j |r_j|, the bound on |H|.
    pub fn amplitude_bound(&self) -> f64 {
        self.interfaces.iter().map(|i| i.r.norm()).sum()
    }

    /// Surface response at absolute angular frequency ω (bulk excluded).
    pub fn surface_response(&self, omega: f64) -> Result<Complex64> {
        let mut h = self.interfaces[0].r;
        let mut phase = 0.0;
        for (gap, iface) in self.gaps.iter().zip(&self.interfaces[1..]) {
            if gap.thickness_m > 0.0 {
                phase += 2.0 * gap.material.wavenumber(omega)? * gap.thickness_m;
            }
            h += iface.r * Complex64::from_polar(1.0, phase);
        }
        Ok(h)
    }

    /// Full response at absolute ω, including the bulk element if present.
    pub fn response(&self, omega: f64) -> Result<Complex64> {
        let h = self.surface_response(omega)?;
        match &self.bulk {
            Some(b) => Ok(h * b.factor(omega)?),
            None => Ok(h),
        }
    }

    /// Round-trip group delay of each interface relative to the first, at ω0.
    pub fn interface_delays(&self, omega0: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.interfaces.len());
        let mut tau = 0.0;
        out.push(tau);
        for gap in &self.gaps {
            if gap.thickness_m > 0.0 {
                tau += 2.0 * gap.thickness_m * gap.material.phase_expansion(omega0)?.alpha;
            }
            out.push(tau);
        }
        Ok(out)
    }

    /// Path-delay positions (µm, `x = c·τ/2`) at which each interface
    /// appears in an interferogram, bulk group delay included.
    pub fn feature_positions_um(&self, omega0: f64) -> Result<Vec<f64>> {
        let offset = match &self.bulk {
            Some(b) => b.group_delay(omega0)?,
            None => 0.0,
        };
        Ok(self
            .interface_delays(omega0)?
            .into_iter()
            .map(|t| 0.5 * SPEED_OF_LIGHT * (t + offset) * 1e6)
            .collect())
    }
}

/// H sampled on a symmetric offset grid about ω0.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub omega0: f64,
    pub grid: OmegaGrid,
    pub values: Vec<Complex64>,
}

impl TransferFunction {
    pub fn from_values(omega0: f64, grid: OmegaGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::contract(format!(
                "transfer function has {} samples for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            omega0,
            grid,
            values,
        })
    }

    /// Multiplies every sample by `exp(i φ(Ω))`.
    pub fn with_phase(&self, phase: &[f64]) -> Result<Self> {
        if phase.len() != self.values.len() {
            return Err(Error::contract("phase length does not match transfer function"));
        }
        let values = self
            .values
            .iter()
            .zip(phase)
            .map(|(h, &p)| h * Complex64::from_polar(1.0, p))
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }
}

/// Samples the stack response at ω0 + Ω for every grid node.
pub fn transfer_function(stack: &LayerStack, grid: &OmegaGrid, omega0: f64) -> Result<TransferFunction> {
    let values = (0..grid.len())
        .map(|j| stack.response(omega0 + grid.value(j)))
        .collect::<Result<Vec<_>>>()?;
    TransferFunction::from_values(omega0, *grid, values)
}

/// Applies a pure-phase bulk element: H'(Ω) = H(Ω)·exp(i·passes·k(ω0+Ω)·L).
pub fn with_bulk_dispersion(
    h: &TransferFunction,
    material: &DispersiveMaterial,
    length_m: f64,
    passes: u32,
) -> Result<TransferFunction> {
    let bulk = BulkElement::new(material.clone(), length_m, passes)?;
    let values = (0..h.grid.len())
        .map(|j| Ok(h.values[j] * bulk.factor(h.omega0 + h.grid.value(j))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransferFunction {
        values,
        ..h.clone()
    })
}
