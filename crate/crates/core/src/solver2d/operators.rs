//! Per-depth-row matrices. With `B = diag(c²/η̃²)·L_x` every factor is
//! `M_s = γ_s B - I`, so the `M_s` commute for any lateral velocity
//! profile.

use super::coeffs::{DrpStencil, PadeCoefficients};
use crate::error::Result;
use crate::numkernels::{BandedLu, BandedMatrix};

#[derive(Debug, Clone)]
pub struct RowOperators {
    /// Velocity row the operators were built for.
    pub c: Vec<f64>,
    /// `L_x`.
    pub lap: BandedMatrix,
    /// `β_s c² / η̃²` per node, for `-β_s c² L_x U / η̃²`.
    pub c2_over_eta2: Vec<f64>,
    pub m: [BandedMatrix; 3],
    pub m_lu: [BandedLu; 3],
    /// `[M2M3, M1M3, M1M2]`.
    pub pair: [BandedMatrix; 3],
    /// `M1M2M3`.
    pub triple: BandedMatrix,
}

impl RowOperators {
    pub fn new(
        c: &[f64],
        hx: f64,
        eta_t: f64,
        pade: &PadeCoefficients,
        drp: &DrpStencil,
    ) -> Result<Self> {
        let n = c.len();
        let lap = drp.matrix(n, hx);
        let c2_over_eta2: Vec<f64> = c.iter().map(|v| v * v / (eta_t * eta_t)).collect();
        let mut b = lap.clone();
        b.scale_rows(&c2_over_eta2);
        let m: [BandedMatrix; 3] = std::array::from_fn(|s| {
            let mut ms = b.scaled(pade.gamma[s]);
            ms.add_identity(-1.0);
            ms
        });
        let m_lu = [
            m[0].factor_no_pivot()?,
            m[1].factor_no_pivot()?,
            m[2].factor_no_pivot()?,
        ];
        let pair = [
            m[1].product(&m[2]),
            m[0].product(&m[2]),
            m[0].product(&m[1]),
        ];
        let triple = pair[2].product(&m[2]);
        Ok(RowOperators {
            c: c.to_vec(),
            lap,
            c2_over_eta2,
            m,
            m_lu,
            pair,
            triple,
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    /// `‖M_i M_j - M_j M_i‖∞` over all pairs.
    pub fn commutator_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                let a = self.m[i].product(&self.m[j]);
                let b = self.m[j].product(&self.m[i]);
                worst = worst.max(a.add_scaled(&b, -1.0).norm_inf());
            }
        }
        worst
    }

    /// `Ψ_s = M_s^{-1}(-(β_s/γ_s) U + F_s) - (β_s/γ_s) U` with
    /// `F_s = Φ2(ψ_s)/η̃²`.
    pub fn psi_from_u(
        &self,
        pade: &PadeCoefficients,
        s: usize,
        u: &[f64],
        f_s: &[f64],
        out: &mut [f64],
    ) {
        let r = pade.ratio(s);
        for ((o, uv), fv) in out.iter_mut().zip(u).zip(f_s) {
            *o = -r * uv + fv;
        }
        self.m_lu[s].solve_in_place(out);
        for (o, uv) in out.iter_mut().zip(u) {
            *o -= r * uv;
        }
    }

    /// `M_s Ψ_s = -β_s c² L_x U / η̃² + F_s`, with `lap_u = L_x U`.
    pub fn psi_from_lap(
        &self,
        pade: &PadeCoefficients,
        s: usize,
        lap_u: &[f64],
        f_s: &[f64],
        out: &mut [f64],
    ) {
        let beta = pade.beta[s];
        for (((o, lu), fv), q) in out.iter_mut().zip(lap_u).zip(f_s).zip(&self.c2_over_eta2) {
            *o = -beta * q * lu + fv;
        }
        self.m_lu[s].solve_in_place(out);
    }
}

/// Left operator of the reduced equation for `U_{k+1}`:
/// `M1M2M3·(diag(c)/h_z + a·η̃(1 + Σβ/γ)) + a·η̃·Σ_s (β_s/γ_s)·Π_{r≠s} M_r`,
/// where `a` is the implicit weight of the depth scheme.
pub fn reduced_operator(
    ops: &RowOperators,
    pade: &PadeCoefficients,
    eta_t: f64,
    weight: f64,
    hz: f64,
) -> BandedMatrix {
    let ae = weight * eta_t;
    let diag: Vec<f64> = ops
        .c
        .iter()
        .map(|c| c / hz + ae * (1.0 + pade.ratio_sum()))
        .collect();
    let mut a = ops.triple.clone();
    a.scale_cols(&diag);
    for s in 0..3 {
        a = a.add_scaled(&ops.pair[s], ae * pade.ratio(s));
    }
    a
}

/// Right side of the reduced equation:
/// `M1M2M3·F_u + a·η̃·Σ_s Π_{r≠s} M_r·F_s`.
pub fn reduced_rhs(
    ops: &RowOperators,
    eta_t: f64,
    weight: f64,
    f_u: &[f64],
    f_psi: [&[f64]; 3],
    out: &mut [f64],
) {
    let n = ops.n();
    ops.triple.matvec(f_u, out);
    let mut tmp = vec![0.0; n];
    let ae = weight * eta_t;
    for s in 0..3 {
        ops.pair[s].matvec(f_psi[s], &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += ae * t;
        }
    }
}

/// Reduced operator and right side for one depth step.
pub fn assemble_reduced(
    ops: &RowOperators,
    pade: &PadeCoefficients,
    eta_t: f64,
    weight: f64,
    hz: f64,
    f_u: &[f64],
    f_psi: [&[f64]; 3],
) -> (BandedMatrix, Vec<f64>) {
    let a = reduced_operator(ops, pade, eta_t, weight, hz);
    let mut rhs = vec![0.0; ops.n()];
    reduced_rhs(ops, eta_t, weight, f_u, f_psi, &mut rhs);
    (a, rhs)
}

/// Factored reduced operator for one row, step and weight.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub weight: f64,
    pub hz: f64,
    pub lu: BandedLu,
}

impl ReducedSystem {
    pub fn new(
        ops: &RowOperators,
        pade: &PadeCoefficients,
        eta_t: f64,
        weight: f64,
        hz: f64,
    ) -> Result<Self> {
        let lu = reduced_operator(ops, pade, eta_t, weight, hz).factor()?;
        Ok(ReducedSystem { weight, hz, lu })
    }
}
