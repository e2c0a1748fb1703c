use serde::{Deserialize, Serialize};
use std::fmt;

/// Linear multistep weights over offsets `first_offset ..= first_offset + len - 1`
/// relative to the current node, stored as integers over a common
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepWeights {
    pub numerators: &'static [i64],
    pub denominator: i64,
    pub first_offset: i32,
}

impl StepWeights {
    pub fn weights(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .map(|&n| n as f64 / self.denominator as f64)
            .collect()
    }

    pub fn offsets(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.numerators.len() as i32).map(move |k| self.first_offset + k)
    }

    /// Number of back values needed before the current node.
    pub fn history(&self) -> usize {
        (-self.first_offset).max(0) as usize
    }

    pub fn is_implicit(&self) -> bool {
        self.first_offset + self.numerators.len() as i32 > 1
    }

    /// Weight of the node ahead of the current one (offset +1), if any.
    pub fn implicit_weight(&self) -> f64 {
        if self.is_implicit() {
            *self.numerators.last().unwrap() as f64 / self.denominator as f64
        } else {
            0.0
        }
    }
}

/// Explicit first-order: right side at the current node.
pub const FORWARD1: StepWeights = StepWeights {
    numerators: &[1],
    denominator: 1,
    first_offset: 0,
};
/// First-order with the right side at the next node.
pub const BACKWARD1: StepWeights = StepWeights {
    numerators: &[1],
    denominator: 1,
    first_offset: 1,
};
pub const TRAPEZOID: StepWeights = StepWeights {
    numerators: &[1, 1],
    denominator: 2,
    first_offset: 0,
};
pub const AM3: StepWeights = StepWeights {
    numerators: &[-1, 8, 5],
    denominator: 12,
    first_offset: -1,
};
pub const AM4: StepWeights = StepWeights {
    numerators: &[1, -5, 19, 9],
    denominator: 24,
    first_offset: -2,
};
/// Fifth-order Adams–Moulton, offsets -3..=1.
pub const AM5: StepWeights = StepWeights {
    numerators: &[-19, 106, -264, 646, 251],
    denominator: 720,
    first_offset: -3,
};
/// Sixth-order Adams–Moulton, offsets -4..=1.
pub const AM6: StepWeights = StepWeights {
    numerators: &[27, -173, 482, -798, 1427, 475],
    denominator: 1440,
    first_offset: -4,
};
/// Fifth-order Adams–Bashforth, offsets -4..=0.
pub const AB5: StepWeights = StepWeights {
    numerators: &[251, -1274, 2616, -2774, 1901],
    denominator: 720,
    first_offset: -4,
};

/// Central first-derivative stencils for the inconsistent right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CentralDifference {
    /// `(-f[i+2] + 8 f[i+1] - 8 f[i-1] + f[i-2]) / 12h`
    Fourth,
    /// `(f[i+3] - 9 f[i+2] + 45 f[i+1] - 45 f[i-1] + 9 f[i-2] - f[i-3]) / 60h`
    Sixth,
}

impl CentralDifference {
    /// Antisymmetric weights `w_k` for `f[i+k] - f[i-k]`, k = 1..
    pub fn half_weights(&self) -> &'static [f64] {
        match self {
            CentralDifference::Fourth => &[8.0 / 12.0, -1.0 / 12.0],
            CentralDifference::Sixth => &[45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0],
        }
    }

    pub fn reach(&self) -> usize {
        self.half_weights().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stabilizer {
    None,
    /// Alternate-node spline filtration of the Φ1 grid before each march.
    SplineFilter {
        degree: usize,
    },
    /// Φ1 rebuilt from the previous term with a central difference.
    Inconsistent {
        stencil: CentralDifference,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Linear multistep march (first-order, trapezoid and Adams schemes).
    Multistep(MultistepKind),
    Rk4,
    /// Crank–Nicolson on `h` and `h/2` combined as `(4·fine - coarse)/3`.
    RichardsonCn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultistepKind {
    Forward1,
    Backward1,
    CrankNicolson,
    Am3,
    Am4,
    Am5,
    Am6,
    Ab5,
}

impl MultistepKind {
    pub fn weights(&self) -> StepWeights {
        match self {
            MultistepKind::Forward1 => FORWARD1,
            MultistepKind::Backward1 => BACKWARD1,
            MultistepKind::CrankNicolson => TRAPEZOID,
            MultistepKind::Am3 => AM3,
            MultistepKind::Am4 => AM4,
            MultistepKind::Am5 => AM5,
            MultistepKind::Am6 => AM6,
            MultistepKind::Ab5 => AB5,
        }
    }
}

/// A 1D scheme: marching method plus stabilizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub method: Method,
    pub stabilizer: Stabilizer,
}

impl SchemeSpec {
    pub const fn multistep(kind: MultistepKind) -> Self {
        SchemeSpec {
            method: Method::Multistep(kind),
            stabilizer: Stabilizer::None,
        }
    }

    pub const fn forward1() -> Self {
        Self::multistep(MultistepKind::Forward1)
    }

    pub const fn backward1() -> Self {
        Self::multistep(MultistepKind::Backward1)
    }

    pub const fn crank_nicolson() -> Self {
        Self::multistep(MultistepKind::CrankNicolson)
    }

    pub const fn rk4() -> Self {
        SchemeSpec {
            method: Method::Rk4,
            stabilizer: Stabilizer::None,
        }
    }

    pub const fn richardson_cn() -> Self {
        SchemeSpec {
            method: Method::RichardsonCn,
            stabilizer: Stabilizer::None,
        }
    }

    /// AM5 with quintic spline filtration.
    pub const fn am5_i5() -> Self {
        SchemeSpec {
            method: Method::Multistep(MultistepKind::Am5),
            stabilizer: Stabilizer::SplineFilter { degree: 5 },
        }
    }

    /// AM6 with septic spline filtration.
    pub const fn am6_i7() -> Self {
        SchemeSpec {
            method: Method::Multistep(MultistepKind::Am6),
            stabilizer: Stabilizer::SplineFilter { degree: 7 },
        }
    }

    /// AM5 with the fourth-order inconsistent right-hand side.
    pub const fn am5_d4() -> Self {
        SchemeSpec {
            method: Method::Multistep(MultistepKind::Am5),
            stabilizer: Stabilizer::Inconsistent {
                stencil: CentralDifference::Fourth,
            },
        }
    }

    pub fn with_stabilizer(self, stabilizer: Stabilizer) -> Self {
        SchemeSpec { stabilizer, ..self }
    }

    /// Short name as used in result tables.
    pub fn name(&self) -> String {
        let base = match self.method {
            Method::Multistep(k) => match k {
                MultistepKind::Forward1 => "FWD1",
                MultistepKind::Backward1 => "BWD1",
                MultistepKind::CrankNicolson => "CN",
                MultistepKind::Am3 => "AM3",
                MultistepKind::Am4 => "AM4",
                MultistepKind::Am5 => "AM5",
                MultistepKind::Am6 => "AM6",
                MultistepKind::Ab5 => "AB5",
            },
            Method::Rk4 => "RK4",
            Method::RichardsonCn => "Richardson",
        };
        match self.stabilizer {
            Stabilizer::None => base.to_string(),
            Stabilizer::SplineFilter { degree } => format!("{base}-I{degree}"),
            Stabilizer::Inconsistent { stencil } => match stencil {
                CentralDifference::Fourth => format!("{base}-D4"),
                CentralDifference::Sixth => format!("{base}-D6"),
            },
        }
    }

    /// Parses the table names (`AM5-I5`, `AM6-I7`, `AM5-D4`, `CN`, `RK4`,
    /// `Richardson`, `FWD1`, `BWD1`, `AM3`..`AM6`, `AB5`), case-insensitive.
    pub fn parse(name: &str) -> Option<Self> {
        let upper = name.trim().to_ascii_uppercase();
        let (base, suffix) = match upper.split_once('-') {
            Some((b, s)) => (b.to_string(), Some(s.to_string())),
            None => (upper.clone(), None),
        };
        let method = match base.as_str() {
            "FWD1" | "FORWARD1" => Method::Multistep(MultistepKind::Forward1),
            "BWD1" | "BACKWARD1" => Method::Multistep(MultistepKind::Backward1),
            "CN" => Method::Multistep(MultistepKind::CrankNicolson),
            "AM3" => Method::Multistep(MultistepKind::Am3),
            "AM4" => Method::Multistep(MultistepKind::Am4),
            "AM5" => Method::Multistep(MultistepKind::Am5),
            "AM6" => Method::Multistep(MultistepKind::Am6),
            "AB5" => Method::Multistep(MultistepKind::Ab5),
            "RK4" => Method::Rk4,
            "RICHARDSON" | "RICHARDSON_CN" => Method::RichardsonCn,
            _ => return None,
        };
        let stabilizer = match suffix.as_deref() {
            None => Stabilizer::None,
            Some("I3") => Stabilizer::SplineFilter { degree: 3 },
            Some("I5") => Stabilizer::SplineFilter { degree: 5 },
            Some("I7") => Stabilizer::SplineFilter { degree: 7 },
            Some("D4") => Stabilizer::Inconsistent {
                stencil: CentralDifference::Fourth,
            },
            Some("D6") => Stabilizer::Inconsistent {
                stencil: CentralDifference::Sixth,
            },
            Some(_) => return None,
        };
        Some(SchemeSpec { method, stabilizer })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum(w: &StepWeights) -> i64 {
        w.numerators.iter().sum()
    }

    #[test]
    fn coefficient_sums_equal_denominators() {
        for w in [FORWARD1, BACKWARD1, TRAPEZOID, AM3, AM4, AM5, AM6, AB5] {
            assert_eq!(sum(&w), w.denominator);
        }
        assert_eq!(sum(&AM5), 720);
        assert_eq!(sum(&AB5), 720);
    }

    /// A k-step method of order p integrates x^q exactly for q < p:
    /// Σ w_j (j)^(q) = ((1)^(q+1) - 0) / (q+1) with offsets relative to
    /// the current node.
    #[test]
    fn order_conditions() {
        for (w, order) in [
            (AM3, 3),
            (AM4, 4),
            (AM5, 5),
            (AM6, 6),
            (AB5, 5),
            (TRAPEZOID, 2),
        ] {
            let ws = w.weights();
            for q in 0..order {
                let lhs: f64 = ws
                    .iter()
                    .zip(w.offsets())
                    .map(|(c, j)| c * (j as f64).powi(q))
                    .sum();
                let rhs = 1.0 / (q as f64 + 1.0);
                assert!((lhs - rhs).abs() < 1e-13, "{w:?} q={q}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for s in [
            SchemeSpec::am5_i5(),
            SchemeSpec::am6_i7(),
            SchemeSpec::am5_d4(),
            SchemeSpec::crank_nicolson(),
            SchemeSpec::rk4(),
            SchemeSpec::richardson_cn(),
            SchemeSpec::forward1(),
            SchemeSpec::backward1(),
        ] {
            assert_eq!(SchemeSpec::parse(&s.name()), Some(s));
        }
        assert_eq!(SchemeSpec::parse("bogus"), None);
    }
}
