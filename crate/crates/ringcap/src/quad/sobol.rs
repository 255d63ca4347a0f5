//! Sobol low-discrepancy sequence (Bratley-Fox direction numbers, up to 40
//! dimensions), used for the quasi-Monte-Carlo volume integrals in n >= 4.

const DIM_MAX: usize = 40;
const LOG_MAX: usize = 30;

const INITIAL_V: [[u64; DIM_MAX]; 8] = [
    [1; DIM_MAX],
    [
        0, 0, 1, 3, 1, 3, 1, 3, 3, 1, 3, 1, 3, 1, 3, 1, 1, 3, 1, 3, 1, 3, 1, 3, 3, 1, 3, 1, 3, 1,
        3, 1, 1, 3, 1, 3, 1, 3, 1, 3,
    ],
    [
        0, 0, 0, 7, 5, 1, 3, 3, 7, 5, 5, 7, 7, 1, 3, 3, 7, 5, 1, 1, 5, 3, 3, 1, 7, 5, 1, 3, 3, 7,
        5, 1, 1, 5, 7, 7, 5, 1, 3, 3,
    ],
    [
        0, 0, 0, 0, 0, 1, 7, 9, 13, 11, 1, 3, 7, 9, 5, 13, 13, 11, 3, 15, 5, 3, 15, 7, 9, 13, 9,
        1, 11, 7, 5, 15, 1, 15, 11, 5, 3, 1, 7, 9,
    ],
    [
        0, 0, 0, 0, 0, 0, 0, 9, 3, 27, 15, 29, 21, 23, 19, 11, 25, 7, 13, 17, 1, 25, 29, 3, 31,
        11, 5, 23, 27, 19, 21, 5, 1, 17, 13, 7, 15, 9, 31, 9,
    ],
    [
        0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 37, 33, 7, 5, 11, 39, 63, 27, 17, 15, 23, 29, 3,
        21, 13, 31, 25, 9, 49, 33, 19, 29, 11, 19, 27, 15, 25,
    ],
    [
        0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 13, 33, 115, 41, 79, 17, 29,
        119, 75, 73, 105, 7, 59, 65, 21, 3, 113, 61, 89, 45, 107,
    ],
    [
        0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
        0, 0, 0, 0, 0, 0, 0, 7, 23, 39,
    ],
];

const POLY: [u64; DIM_MAX] = [
    1, 3, 7, 11, 13, 19, 25, 37, 59, 47, 61, 55, 41, 67, 97, 91, 109, 103, 115, 131, 193, 137,
    145, 143, 241, 157, 185, 167, 229, 171, 213, 191, 253, 203, 211, 239, 247, 285, 369, 299,
];

fn most_significant_bit(n: u64) -> u32 {
    64 - n.leading_zeros()
}

fn lowest_zero_bit(n: u64) -> u32 {
    (!n).trailing_zeros() + 1
}

/// Deterministic Sobol point generator in [0, 1)^dim.
pub struct SobolSeq {
    dim: usize,
    v: Vec<[u64; LOG_MAX]>,
    lastq: Vec<u64>,
    recipd: f64,
    index: u64,
}

impl SobolSeq {
    pub fn new(dim: usize) -> Self {
        assert!(
            (1..=DIM_MAX).contains(&dim),
            "sobol sequence supports dimensions 1..={DIM_MAX}"
        );
        let mut v = vec![[0u64; LOG_MAX]; dim];
        for d in 0..dim {
            for j in 0..8 {
                v[d][j] = INITIAL_V[j][d];
            }
        }
        // dimension 1 is the van der Corput sequence: every m_j = 1
        v[0] = [1u64; LOG_MAX];
        for d in 1..dim {
            let poly_degree = (most_significant_bit(POLY[d] >> 1)) as usize;
            let mut includ = vec![false; poly_degree];
            let mut j = POLY[d];
            for k in (0..poly_degree).rev() {
                let j2 = j >> 1;
                includ[k] = j != 2 * j2;
                j = j2;
            }
            for j in poly_degree..LOG_MAX {
                let mut newv = v[d][j - poly_degree];
                let mut l = 1u64;
                for k in 0..poly_degree {
                    l <<= 1;
                    if includ[k] {
                        newv ^= l * v[d][j - k - 1];
                    }
                }
                v[d][j] = newv;
            }
        }
        // Scale column j by 2^(LOG_MAX - 1 - j) so every entry shares the
        // common denominator 2^LOG_MAX.
        let mut l = 1u64;
        for j in (0..LOG_MAX - 1).rev() {
            l <<= 1;
            for vd in v.iter_mut() {
                vd[j] *= l;
            }
        }
        let recipd = 1.0 / (2 * l) as f64;
        SobolSeq {
            dim,
            v,
            lastq: vec![0; dim],
            recipd,
            index: 0,
        }
    }

    /// Writes the next point into `out` (length `dim`).
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let l = (lowest_zero_bit(self.index) - 1) as usize;
        assert!(l < LOG_MAX, "sobol sequence exhausted (2^{LOG_MAX} points)");
        for d in 0..self.dim {
            out[d] = self.lastq[d] as f64 * self.recipd;
            self.lastq[d] ^= self.v[d][l];
        }
        self.index += 1;
    }
}
