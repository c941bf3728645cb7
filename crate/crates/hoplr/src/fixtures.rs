//! Published rules and errors for base 2 with `gamma_j = 0.9^j`, and the
//! CBC-versus-explicit comparison at `alpha = 2`, `s = 5`.
//!
//! Error values are kept as printed, since their last digit sets the
//! comparison tolerance.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublishedTable {
    pub id: &'static str,
    pub m: u32,
    pub alpha: u32,
    pub p: u64,
    pub q: [u64; 10],
    pub e: [&'static str; 10],
}

impl PublishedTable {
    pub fn n(&self) -> u32 {
        self.alpha * self.m
    }
}

pub const TABLES: [PublishedTable; 4] = [
    PublishedTable {
        id: "2a",
        m: 10,
        alpha: 2,
        p: 1179649,
        q: [
            453270, 920860, 324514, 394664, 106142, 587632, 279628, 676057, 626366, 856775,
        ],
        e: [
            "2.14e-6", "4.55e-5", "6.27e-4", "3.75e-3", "1.30e-2", "3.39e-2", "7.45e-2", "1.43e-1", "2.51e-1",
            "4.08e-1",
        ],
    },
    PublishedTable {
        id: "2b",
        m: 12,
        alpha: 2,
        p: 28311553,
        q: [
            2028384, 13051202, 839202, 14647583, 6874738, 6522492, 13569662, 9821234, 10570369, 406897,
        ],
        e: [
            "1.34e-7", "3.44e-6", "6.58e-5", "4.72e-4", "2.02e-3", "6.09e-3", "1.45e-2", "2.97e-2", "5.46e-2",
            "9.19e-2",
        ],
    },
    PublishedTable {
        id: "3a",
        m: 7,
        alpha: 3,
        p: 2621441,
        q: [
            1492861, 1022044, 1785216, 215936, 1978368, 1197580, 1837814, 485609, 1636853, 48810,
        ],
        e: [
            "2.02e-6", "5.24e-4", "8.20e-3", "4.05e-2", "1.22e-1", "2.82e-1", "5.54e-1", "9.80e-1", "1.60", "2.48",
        ],
    },
    PublishedTable {
        id: "3b",
        m: 8,
        alpha: 3,
        p: 28311553,
        q: [
            10844342, 2604270, 5720893, 8141702, 3831799, 3616803, 15701694, 7750425, 2240926, 493873,
        ],
        e: [
            "2.51e-7", "8.85e-5", "2.43e-3", "1.45e-2", "4.95e-2", "1.21e-1", "2.49e-1", "4.54e-1", "7.59e-1", "1.19",
        ],
    },
];

pub fn table(id: &str) -> Option<&'static PublishedTable> {
    TABLES.iter().find(|t| t.id == id)
}

/// One row of the comparison: `m`, then CBC and explicit errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub m: u32,
    pub cbc: &'static str,
    pub explicit: &'static str,
}

const fn row(m: u32, cbc: &'static str, explicit: &'static str) -> ComparisonRow {
    ComparisonRow { m, cbc, explicit }
}

pub const COMPARISON_DIM: usize = 5;

pub const COMPARISON_GEOM: [ComparisonRow; 8] = [
    row(5, "0.9291", "1.0930"),
    row(6, "0.4085", "0.4259"),
    row(7, "0.1778", "0.1984"),
    row(8, "0.0747", "0.0980"),
    row(9, "0.0312", "0.0403"),
    row(10, "0.0128", "0.0168"),
    row(11, "0.0052", "0.0071"),
    row(12, "0.0020", "0.0027"),
];

pub const COMPARISON_POLYDECAY: [ComparisonRow; 8] = [
    row(5, "0.028917", "0.096254"),
    row(6, "0.009912", "0.014542"),
    row(7, "0.003427", "0.005895"),
    row(8, "0.001175", "0.002356"),
    row(9, "0.000406", "0.000827"),
    row(10, "0.000139", "0.000290"),
    row(11, "0.000046", "0.000091"),
    row(12, "0.000014", "0.000034"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reproduce::Printed;
    use hoplr_core::gfpoly::{Modulus, Poly, PrimeBase};

    #[test]
    fn moduli_have_the_right_degree() {
        for t in &TABLES {
            let md = Modulus::new(Poly::from_code(t.p), PrimeBase::TWO).unwrap();
            assert_eq!(md.degree(), t.n(), "table {}", t.id);
            assert!(md.is_irreducible());
            assert!(t.q.iter().all(|&q| q > 0 && q < md.field_size()));
        }
    }

    #[test]
    fn printed_values_parse_and_grow() {
        for t in &TABLES {
            let v: Vec<f64> = t.e.iter().map(|e| Printed::parse(e).unwrap().value).collect();
            assert!(v.windows(2).all(|w| w[0] < w[1]));
        }
        for rows in [&COMPARISON_GEOM, &COMPARISON_POLYDECAY] {
            for r in rows {
                assert!(Printed::parse(r.cbc).unwrap().value < Printed::parse(r.explicit).unwrap().value);
            }
        }
    }
}
