use super::{spectrum, BooleanFn, MAX_PAIR_N};
use crate::error::{check_capacity, Error, Result};

/// Binary decision tree over coordinates; every leaf must fix the value of `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf,
    Query {
        var: usize,
        zero: Box<DecisionTree>,
        one: Box<DecisionTree>,
    },
}

impl DecisionTree {
    /// Queries `order` one after another regardless of the answers.
    pub fn sequential(order: &[usize]) -> DecisionTree {
        match order.split_first() {
            None => DecisionTree::Leaf,
            Some((&var, rest)) => DecisionTree::Query {
                var,
                zero: Box::new(DecisionTree::sequential(rest)),
                one: Box::new(DecisionTree::sequential(rest)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryAlgorithm {
    Tree(DecisionTree),
    /// Queries in the given order, stopping as soon as `f` is determined.
    FixedOrder(Vec<usize>),
    /// Queries in a uniformly random order, stopping as soon as `f` is determined.
    RandomPermutation,
}

/// Minimum and maximum of `f` over every subcube, indexed in base 3
/// (digit 0/1 fixes a coordinate, 2 leaves it free).
struct Subcubes {
    lo: Vec<f64>,
    hi: Vec<f64>,
    tern: Vec<u32>,
    full: u32,
}

impl Subcubes {
    fn new(f: &BooleanFn) -> Self {
        let n = f.n();
        let pow3: Vec<u32> = (0..=n).map(|i| 3u32.pow(i as u32)).collect();
        let size = pow3[n] as usize;
        let (mut lo, mut hi) = (vec![0.0; size], vec![0.0; size]);
        for idx in 0..size {
            let mut rest = idx as u32;
            let mut free = None;
            let mut omega = 0u32;
            for i in 0..n {
                match rest % 3 {
                    2 if free.is_none() => free = Some(i),
                    1 => omega |= 1 << i,
                    _ => {}
                }
                rest /= 3;
            }
            match free {
                None => {
                    lo[idx] = f.value(omega);
                    hi[idx] = lo[idx];
                }
                Some(i) => {
                    let a = idx - 2 * pow3[i] as usize;
                    let b = idx - pow3[i] as usize;
                    lo[idx] = lo[a].min(lo[b]);
                    hi[idx] = hi[a].max(hi[b]);
                }
            }
        }
        let tern = (0..1u32 << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| pow3[i]).sum())
            .collect();
        Subcubes {
            lo,
            hi,
            tern,
            full: (1u32 << n) - 1,
        }
    }

    /// Whether revealing the coordinates in `known` (values from `omega`) fixes `f`.
    fn determined(&self, known: u32, omega: u32) -> bool {
        let idx = (self.tern[(known & omega) as usize] + 2 * self.tern[(!known & self.full) as usize]) as usize;
        self.lo[idx] == self.hi[idx]
    }
}

/// `δ_j = P_p(the algorithm queries j)` for every coordinate, by enumerating
/// all inputs and, for the random order, all query orders via a subset recursion.
pub fn exact_revealment(f: &BooleanFn, alg: &QueryAlgorithm) -> Result<Vec<f64>> {
    check_capacity("revealment arity", f.n(), MAX_PAIR_N)?;
    let n = f.n();
    let cubes = Subcubes::new(f);
    let w = f.weights_by_weight();
    let mut delta = vec![0.0; n];
    let mut prob = vec![0.0; 1 << n];
    for omega in 0..1u32 << n {
        let mu = w[omega.count_ones() as usize];
        match alg {
            QueryAlgorithm::Tree(tree) => {
                let mut node = tree;
                let mut known = 0u32;
                while let DecisionTree::Query { var, zero, one } = node {
                    if *var >= n {
                        return Err(Error::invalid(format!("tree queries coordinate {var} >= n")));
                    }
                    if known & (1 << var) == 0 {
                        known |= 1 << var;
                        delta[*var] += mu;
                    }
                    node = if omega >> var & 1 == 1 { one } else { zero };
                }
                if !cubes.determined(known, omega) {
                    return Err(Error::invalid("decision tree leaf does not determine f"));
                }
            }
            QueryAlgorithm::FixedOrder(order) => {
                let mut known = 0u32;
                for &j in order {
                    if j >= n {
                        return Err(Error::invalid(format!("order contains coordinate {j} >= n")));
                    }
                    if cubes.determined(known, omega) {
                        break;
                    }
                    if known & (1 << j) == 0 {
                        known |= 1 << j;
                        delta[j] += mu;
                    }
                }
                if !cubes.determined(known, omega) {
                    return Err(Error::invalid("query order does not determine f"));
                }
            }
            QueryAlgorithm::RandomPermutation => {
                prob.iter_mut().for_each(|x| *x = 0.0);
                prob[0] = 1.0;
                for q in 0..1u32 << n {
                    let pq = prob[q as usize];
                    if pq == 0.0 || cubes.determined(q, omega) {
                        continue;
                    }
                    let share = pq / (n - q.count_ones() as usize) as f64;
                    for j in (0..n).filter(|j| q >> j & 1 == 0) {
                        delta[j] += mu * share;
                        prob[(q | 1 << j) as usize] += share;
                    }
                }
            }
        }
    }
    Ok(delta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsLevel {
    pub k: usize,
    /// `Σ_{|S| = k} f̂(S)²`.
    pub mass: f64,
    /// `k · ‖f‖₂² · δ`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsReport {
    pub revealment: f64,
    pub per_coordinate: Vec<f64>,
    pub norm_sq: f64,
    pub levels: Vec<SsLevel>,
    pub holds: bool,
}

/// Checks `Σ_{|S|=k} f̂(S)² ≤ k ‖f‖₂² δ` for every level `k ≥ 1`, with `δ`
/// the exact revealment of `alg` at density 1/2.
pub fn ss_bound_check(f: &BooleanFn, alg: &QueryAlgorithm) -> Result<SsReport> {
    if f.p() != 0.5 {
        return Err(Error::invalid(format!("spectral bound check needs p = 1/2, got {}", f.p())));
    }
    let per_coordinate = exact_revealment(f, alg)?;
    let revealment = per_coordinate.iter().copied().fold(0.0, f64::max);
    let norm_sq = f.second_moment();
    let masses = spectrum(f).level_masses();
    let levels: Vec<SsLevel> = (1..=f.n())
        .map(|k| {
            let bound = k as f64 * norm_sq * revealment;
            SsLevel {
                k,
                mass: masses[k],
                bound,
                holds: masses[k] <= bound + 1e-12,
            }
        })
        .collect();
    let holds = levels.iter().all(|l| l.holds);
    Ok(SsReport {
        revealment,
        per_coordinate,
        norm_sq,
        levels,
        holds,
    })
}
