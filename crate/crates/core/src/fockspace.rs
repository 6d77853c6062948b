//! Truncated two-mode helicity Fock representation.
//!
//! States `|ñ₊, ñ₋)` are stored row-major, index `ñ₊·N + ñ₋`. The paper's
//! Hilbert-Schmidt basis `|n⟩⟨m|` is represented by the same two-mode tensor;
//! for every quantity computed here the identification is exact.

use crate::error::{Error, Result};
use crate::output::num;
use crate::params::{derive, DeformedQuantities, PhysParams};
use crate::sparse::{annihilation, Csr};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone)]
pub struct FockRep {
    pub n_trunc: usize,
    pub params: PhysParams,
    pub deformed: DeformedQuantities,
    pub b_plus: Csr,
    pub b_plus_dag: Csr,
    pub b_minus: Csr,
    pub b_minus_dag: Csr,
    /// Diagonal Hamiltonian built from the closed-form spectrum.
    pub h_q: Csr,
    /// `E_{ñ₊,ñ₋}` at index `ñ₊·N + ñ₋`.
    pub e_levels: Vec<f64>,
}

/// `(ħ/2)(Ω̃₊ñ₊ + Ω̃₋ñ₋ + Ω̃) + k_{e,E}`.
pub fn helicity_energy(d: &DeformedQuantities, hbar: f64, n_plus: usize, n_minus: usize) -> f64 {
    0.5 * hbar * (d.omega_plus * n_plus as f64 + d.omega_minus * n_minus as f64 + d.omega_tilde) + d.k_ee
}

impl FockRep {
    pub fn build(p: &PhysParams, n_trunc: usize) -> Result<Self> {
        if n_trunc < 2 {
            return Err(Error::Truncation(format!("n_trunc = {n_trunc} < 2")));
        }
        let d = derive(p)?;
        let a = annihilation(n_trunc);
        let id = Csr::identity(n_trunc);
        let b_plus = a.kron(&id);
        let b_minus = id.kron(&a);
        let e_levels: Vec<f64> = (0..n_trunc * n_trunc)
            .map(|i| helicity_energy(&d, p.hbar, i / n_trunc, i % n_trunc))
            .collect();
        Ok(Self {
            n_trunc,
            params: *p,
            deformed: d,
            b_plus_dag: b_plus.transpose(),
            b_minus_dag: b_minus.transpose(),
            b_plus,
            b_minus,
            h_q: Csr::diagonal(&e_levels),
            e_levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.n_trunc * self.n_trunc
    }

    pub fn index(&self, n_plus: usize, n_minus: usize) -> usize {
        n_plus * self.n_trunc + n_minus
    }

    pub fn energy(&self, n_plus: usize, n_minus: usize) -> f64 {
        self.e_levels[self.index(n_plus, n_minus)]
    }

    /// `(ħ/2)(Ω̃₊B‡₊B₊ + Ω̃₋B‡₋B₋ + Ω̃) + k_{e,E}` assembled from the ladder matrices.
    pub fn h_from_ladders(&self) -> Csr {
        let d = &self.deformed;
        let half = 0.5 * self.params.hbar;
        let n_plus = self.b_plus_dag.matmul(&self.b_plus);
        let n_minus = self.b_minus_dag.matmul(&self.b_minus);
        n_plus
            .scale(half * d.omega_plus)
            .add(&n_minus.scale(half * d.omega_minus))
            .add(&Csr::identity(self.dim()).scale(half * d.omega_tilde + d.k_ee))
    }

    /// Max entrywise difference between the ladder-built and diagonal Hamiltonians.
    pub fn representation_defect(&self) -> f64 {
        self.h_from_ladders().sub(&self.h_q).max_abs()
    }

    pub fn write_spectrum_csv<W: Write>(&self, w: W) -> Result<()> {
        let spec = dimensionless_spectrum(self);
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n_plus", "n_minus", "energy", "energy_dimensionless"])?;
        for np in 0..self.n_trunc {
            for nm in 0..self.n_trunc {
                out.write_record([
                    np.to_string(),
                    nm.to_string(),
                    num(self.energy(np, nm)),
                    num(spec.value(np, nm)),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// `Ẽ_{n,m} = ½((Ω̃₊/Ω̃)n + (Ω̃₋/Ω̃)m + 1)` with its consistency against the
/// shifted and rescaled `E_{ñ₊,ñ₋}` table.
#[derive(Debug, Clone, Serialize)]
pub struct DimlessSpectrum {
    pub n_trunc: usize,
    /// Index `n·N + m`.
    pub table: Vec<f64>,
    pub max_dev_vs_levels: f64,
}

impl DimlessSpectrum {
    pub fn value(&self, n: usize, m: usize) -> f64 {
        self.table[n * self.n_trunc + m]
    }
}

pub fn dimensionless_energy(d: &DeformedQuantities, n: usize, m: usize) -> f64 {
    0.5 * (d.omega_plus / d.omega_tilde * n as f64 + d.omega_minus / d.omega_tilde * m as f64 + 1.0)
}

pub fn dimensionless_spectrum(rep: &FockRep) -> DimlessSpectrum {
    let d = &rep.deformed;
    let n = rep.n_trunc;
    let table: Vec<f64> = (0..n * n).map(|i| dimensionless_energy(d, i / n, i % n)).collect();
    let scale = rep.params.hbar * d.omega_tilde;
    let max_dev_vs_levels = (0..n * n)
        .map(|i| ((rep.e_levels[i] - d.k_ee) / scale - table[i]).abs())
        .fold(0.0, f64::max);
    DimlessSpectrum { n_trunc: n, table, max_dev_vs_levels }
}

/// Permutation maps between the plain basis `|n⟩⟨m|` (index `m·N + n`) and
/// the helicity basis `|ñ₊, ñ₋)` (index `ñ₊·N + ñ₋`), with `ñ₊ = n`, `ñ₋ = m`.
#[derive(Debug, Clone)]
pub struct PassagePair {
    /// plain → helicity
    pub u_map: Csr,
    /// helicity → plain
    pub v_map: Csr,
}

pub fn passage(n_trunc: usize) -> Result<PassagePair> {
    if n_trunc == 0 {
        return Err(Error::Truncation("n_trunc must be >= 1".into()));
    }
    let n = n_trunc;
    let trip = (0..n)
        .flat_map(|nn| (0..n).map(move |m| (nn * n + m, m * n + nn, 1.0)))
        .collect();
    let u_map = Csr::from_triplets(n * n, n * n, trip);
    Ok(PassagePair { v_map: u_map.transpose(), u_map })
}

/// `H^dim` in helicity ordering.
pub fn h_dimensionless(rep: &FockRep) -> Csr {
    Csr::diagonal(&dimensionless_spectrum(rep).table)
}

#[derive(Debug, Clone, Serialize)]
pub struct PassageReport {
    pub uv_identity_dev: f64,
    pub vu_identity_dev: f64,
    pub conjugated_is_diagonal: bool,
    pub conjugated_diag_dev: f64,
}

/// Checks `UV = VU = I` and that `V·H^dim·U` is diagonal with `Ẽ_{n,m}` at plain index `m·N + n`.
pub fn passage_check(rep: &FockRep) -> Result<PassageReport> {
    let n = rep.n_trunc;
    let pp = passage(n)?;
    let id = Csr::identity(n * n);
    let conj = pp.v_map.matmul(&h_dimensionless(rep)).matmul(&pp.u_map);
    let dev = (0..n)
        .flat_map(|nn| (0..n).map(move |m| (nn, m)))
        .map(|(nn, m)| (conj.get(m * n + nn, m * n + nn) - dimensionless_energy(&rep.deformed, nn, m)).abs())
        .fold(0.0, f64::max);
    Ok(PassageReport {
        uv_identity_dev: pp.u_map.matmul(&pp.v_map).sub(&id).max_abs(),
        vu_identity_dev: pp.v_map.matmul(&pp.u_map).sub(&id).max_abs(),
        conjugated_is_diagonal: conj.is_diagonal(),
        conjugated_diag_dev: dev,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorDefect {
    /// `max |[B,B‡] − I|` over states below the top level of the mode, both modes.
    pub low_level: f64,
    /// Expected corner value `1 − n_trunc`.
    pub expected_top: f64,
    /// `max |[B,B‡]_{top} − (1 − n_trunc)|`, both modes.
    pub top_level_dev: f64,
    /// `max` over `[B₊,B₋]`, `[B₊,B‡₋]` entries.
    pub cross: f64,
}

pub fn commutator_defect(rep: &FockRep) -> CommutatorDefect {
    let n = rep.n_trunc;
    let top = 1.0 - n as f64;
    let mut low: f64 = 0.0;
    let mut top_dev: f64 = 0.0;
    for (b, bd, plus) in [(&rep.b_plus, &rep.b_plus_dag, true), (&rep.b_minus, &rep.b_minus_dag, false)] {
        let level = |i: usize| if plus { i / n } else { i % n };
        let expected: Vec<f64> = (0..n * n).map(|i| if level(i) == n - 1 { top } else { 1.0 }).collect();
        let diff = b.commutator(bd).sub(&Csr::diagonal(&expected));
        for (i, j, v) in diff.triplets() {
            if level(i) == n - 1 || level(j) == n - 1 {
                top_dev = top_dev.max(v.abs());
            } else {
                low = low.max(v.abs());
            }
        }
    }
    let cross = rep
        .b_plus
        .commutator(&rep.b_minus)
        .max_abs()
        .max(rep.b_plus.commutator(&rep.b_minus_dag).max_abs());
    CommutatorDefect { low_level: low, expected_top: top, top_level_dev: top_dev, cross }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> PhysParams {
        PhysParams::new(1.0, 1.0, 0.5, 0.05).with_field(0.3, -0.2)
    }

    #[test]
    fn ladder_action() {
        let rep = FockRep::build(&generic(), 4).unwrap();
        // B₊|2,1) = √2 |1,1)
        assert!((rep.b_plus.get(rep.index(1, 1), rep.index(2, 1)) - 2f64.sqrt()).abs() < 1e-15);
        assert!((rep.b_minus_dag.get(rep.index(2, 3), rep.index(2, 2)) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.b_plus_dag, rep.b_plus.transpose());
    }

    #[test]
    fn ground_energy_and_zero_field() {
        let p = generic();
        let rep = FockRep::build(&p, 3).unwrap();
        let d = &rep.deformed;
        assert!((rep.energy(0, 0) - (0.5 * d.omega_tilde + d.k_ee)).abs() < 1e-15);
        let d0 = derive(&p.with_field(0.0, 0.0)).unwrap();
        assert_eq!(d0.k_ee, 0.0);
        // k_eE = −½e(E₁x₀+E₂y₀) with x₀ = eE₁/(Mω₀²)
        assert!((d.k_ee + 0.5 * (0.09 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn ladder_hamiltonian_matches_diagonal() {
        let rep = FockRep::build(&generic(), 12).unwrap();
        assert!(rep.representation_defect() < 1e-12);
    }

    #[test]
    fn truncation_rejected() {
        assert!(matches!(FockRep::build(&generic(), 1), Err(Error::Truncation(_))));
    }

    #[test]
    fn commutators() {
        for n in [2usize, 5] {
            let rep = FockRep::build(&generic(), n).unwrap();
            let c = commutator_defect(&rep);
            assert!(c.low_level < 1e-14, "{c:?}");
            assert!(c.top_level_dev < 1e-14, "{c:?}");
            assert_eq!(c.cross, 0.0);
            // corner entry directly
            let full = rep.b_plus.commutator(&rep.b_plus_dag);
            let k = rep.index(n - 1, 0);
            assert!((full.get(k, k) - (1.0 - n as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn dimensionless_table() {
        let rep = FockRep::build(&PhysParams::new(1.0, 1.0, 0.0, 0.0), 4).unwrap();
        let s = dimensionless_spectrum(&rep);
        assert_eq!(s.value(0, 0), 0.5);
        assert_eq!(s.value(1, 0), 0.75);
        let rep = FockRep::build(&generic(), 6).unwrap();
        let s = dimensionless_spectrum(&rep);
        assert!(s.max_dev_vs_levels < 1e-14);
        for n in 0..5 {
            for m in 0..5 {
                assert!(s.value(n + 1, m) > s.value(n, m));
                assert!(s.value(n, m + 1) > s.value(n, m));
            }
        }
    }

    #[test]
    fn passage_maps() {
        let one = passage(1).unwrap();
        assert_eq!(one.u_map, Csr::identity(1));
        let rep = FockRep::build(&generic(), 5).unwrap();
        let r = passage_check(&rep).unwrap();
        assert_eq!(r.uv_identity_dev, 0.0);
        assert_eq!(r.vu_identity_dev, 0.0);
        assert!(r.conjugated_is_diagonal);
        assert_eq!(r.conjugated_diag_dev, 0.0);
    }

    #[test]
    fn csv_export() {
        let rep = FockRep::build(&generic(), 3).unwrap();
        let mut buf = Vec::new();
        rep.write_spectrum_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n_plus,n_minus,energy,energy_dimensionless");
        assert_eq!(lines.len(), 10);
        assert!(lines[1].starts_with("0,0,"));
    }
}
