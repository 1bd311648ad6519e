//! A small sparse Fock-space representation, enough to apply the generator
//! S = Σ_k A_k (b_k† σ⁺ − b_k σ⁻) to low-excitation states exactly.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Ground,
    Excited,
}

/// Atom level plus photon occupations, stored as sorted (mode, count) pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Basis {
    pub atom: Atom,
    pub photons: Vec<(usize, u32)>,
}

impl Basis {
    pub fn vacuum(atom: Atom) -> Self {
        Self {
            atom,
            photons: Vec::new(),
        }
    }

    pub fn one_photon(atom: Atom, mode: usize) -> Self {
        Self {
            atom,
            photons: vec![(mode, 1)],
        }
    }

    fn count(&self, mode: usize) -> u32 {
        self.photons
            .iter()
            .find(|(m, _)| *m == mode)
            .map_or(0, |(_, c)| *c)
    }

    fn with_count(&self, mode: usize, count: u32) -> Self {
        let mut photons: Vec<(usize, u32)> = self.photons.iter().copied().filter(|(m, _)| *m != mode).collect();
        if count > 0 {
            photons.push((mode, count));
            photons.sort_unstable();
        }
        Self {
            atom: self.atom,
            photons,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockVector(pub BTreeMap<Basis, f64>);

impl FockVector {
    pub fn basis(b: Basis) -> Self {
        Self(BTreeMap::from([(b, 1.0)]))
    }

    fn add(&mut self, b: Basis, c: f64) {
        if c != 0.0 {
            *self.0.entry(b).or_insert(0.0) += c;
        }
    }

    /// True when every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.0.values().all(|&c| c == 0.0)
    }

    pub fn coefficient(&self, b: &Basis) -> f64 {
        self.0.get(b).copied().unwrap_or(0.0)
    }
}

/// S|ψ⟩ for S = Σ_k A_k (b_k† σ⁺ − b_k σ⁻).
pub fn apply_generator(a: &[f64], psi: &FockVector) -> FockVector {
    let mut out = FockVector::default();
    for (b, &c) in &psi.0 {
        for (k, &ak) in a.iter().enumerate() {
            let n = b.count(k);
            match b.atom {
                // b_k† σ⁺ |g, n_k⟩ = √(n_k+1) |e, n_k+1⟩
                Atom::Ground => {
                    let mut raised = b.with_count(k, n + 1);
                    raised.atom = Atom::Excited;
                    out.add(raised, ak * c * ((n + 1) as f64).sqrt());
                }
                // −b_k σ⁻ |e, n_k⟩ = −√n_k |g, n_k−1⟩
                Atom::Excited => {
                    if n > 0 {
                        let mut lowered = b.with_count(k, n - 1);
                        lowered.atom = Atom::Ground;
                        out.add(lowered, -ak * c * (n as f64).sqrt());
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_annihilates_bare_excited_state() {
        let a = [-0.1, -0.02, -0.3];
        let e0 = FockVector::basis(Basis::vacuum(Atom::Excited));
        let s = apply_generator(&a, &e0);
        assert!(s.is_zero());
        // so the truncated e^{−S} ≈ 1 − S + S²/2 leaves |e,{0}⟩ unchanged
        assert!(apply_generator(&a, &s).is_zero());
    }

    #[test]
    fn generator_raises_ground_state() {
        let a = [-0.1, -0.02];
        let g0 = FockVector::basis(Basis::vacuum(Atom::Ground));
        let s = apply_generator(&a, &g0);
        assert_eq!(s.coefficient(&Basis::one_photon(Atom::Excited, 0)), -0.1);
        assert_eq!(s.coefficient(&Basis::one_photon(Atom::Excited, 1)), -0.02);
        let s2 = apply_generator(&a, &s);
        // S²|g,0⟩ = −Σ A_k² |g,0⟩
        assert!((s2.coefficient(&Basis::vacuum(Atom::Ground)) + 0.0104).abs() < 1e-15);
    }
}
