//! Parity-check codes as Tanner graphs: alist parsing, random regular
//! construction, and the GF(2) linear algebra needed for codeword sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodeError {
    #[error("alist line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent adjacency: variable {var} and check {check} disagree")]
    InconsistentAdjacency { var: usize, check: usize },
    #[error("index out of range on line {line}: {value}")]
    IndexOutOfRange { line: usize, value: i64 },
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    BadConstruction(String),
}

/// A binary parity-check code stored as a Tanner graph. Edges are numbered
/// check-major so that check-node updates stream through memory.
#[derive(Debug)]
pub struct ParityCheckCode {
    n: usize,
    m: usize,
    /// Edge -> variable, grouped by check: edges of check `c` occupy
    /// `check_ptr[c]..check_ptr[c+1]`.
    check_ptr: Vec<u32>,
    edge_var: Vec<u32>,
    /// Variable -> its edge ids.
    var_ptr: Vec<u32>,
    var_edges: Vec<u32>,
    dimension: OnceLock<usize>,
}

impl ParityCheckCode {
    /// Builds from per-check variable lists (0-indexed).
    pub fn from_adjacency(n: usize, check_to_vars: Vec<Vec<u32>>) -> Result<Self, CodeError> {
        let m = check_to_vars.len();
        let mut check_ptr = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        check_ptr.push(0u32);
        for vars in &check_to_vars {
            for &v in vars {
                if v as usize >= n {
                    return Err(CodeError::IndexOutOfRange {
                        line: 0,
                        value: v as i64,
                    });
                }
                edge_var.push(v);
            }
            check_ptr.push(edge_var.len() as u32);
        }
        let mut var_deg = vec![0u32; n];
        for &v in &edge_var {
            var_deg[v as usize] += 1;
        }
        let mut var_ptr = vec![0u32; n + 1];
        for i in 0..n {
            var_ptr[i + 1] = var_ptr[i] + var_deg[i];
        }
        let mut cursor = var_ptr.clone();
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[cursor[v as usize] as usize] = e as u32;
            cursor[v as usize] += 1;
        }
        Ok(Self {
            n,
            m,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            dimension: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        (self.check_ptr[c + 1] - self.check_ptr[c]) as usize
    }

    pub fn var_degree(&self, v: usize) -> usize {
        (self.var_ptr[v + 1] - self.var_ptr[v]) as usize
    }

    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_ptr[c] as usize..self.check_ptr[c + 1] as usize
    }

    pub fn edge_variable(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    pub fn variable_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[v] as usize..self.var_ptr[v + 1] as usize]
    }

    pub fn check_vars(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.check_edges(c).map(move |e| self.edge_variable(e))
    }

    /// True when every check is satisfied by the bit vector.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.n);
        (0..self.m).all(|c| self.check_vars(c).fold(0u8, |acc, v| acc ^ bits[v]) == 0)
    }

    fn bit_rows(&self) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        (0..self.m)
            .map(|c| {
                let mut row = vec![0u64; words];
                for v in self.check_vars(c) {
                    row[v / 64] |= 1u64 << (v % 64);
                }
                row
            })
            .collect()
    }

    /// Rank of the parity-check matrix over GF(2).
    pub fn rank(&self) -> usize {
        self.n - self.dimension()
    }

    /// Code dimension `k = n - rank(H)`; computed on first use and cached.
    pub fn dimension(&self) -> usize {
        *self.dimension.get_or_init(|| {
            let mut rows = self.bit_rows();
            let mut rank = 0usize;
            for col in 0..self.n {
                let (w, b) = (col / 64, col % 64);
                let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
                    continue;
                };
                rows.swap(rank, pivot);
                let pivot_row = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[w] >> b & 1 == 1 {
                        for (x, y) in row.iter_mut().zip(&pivot_row) {
                            *x ^= y;
                        }
                    }
                }
                rank += 1;
                if rank == rows.len() {
                    break;
                }
            }
            self.n - rank
        })
    }

    /// A basis of the codeword space (null space of H), each vector as a
    /// bit vector of length `n`.
    pub fn codeword_basis(&self) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        let mut rows = self.bit_rows();
        let mut pivot_col_of_row = Vec::new();
        let mut rank = 0usize;
        for col in 0..self.n {
            let (w, b) = (col / 64, col % 64);
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] >> b & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            pivot_col_of_row.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        let mut is_pivot = vec![false; self.n];
        for &c in &pivot_col_of_row {
            is_pivot[c] = true;
        }
        let mut basis = Vec::with_capacity(self.n - rank);
        for free in (0..self.n).filter(|&c| !is_pivot[c]) {
            let mut vec = vec![0u64; words];
            vec[free / 64] |= 1 << (free % 64);
            // each pivot row reads x[pivot] = sum of its free-column entries
            for (r, &pc) in pivot_col_of_row.iter().enumerate() {
                if rows[r][free / 64] >> (free % 64) & 1 == 1 {
                    vec[pc / 64] ^= 1 << (pc % 64);
                }
            }
            basis.push(vec);
        }
        debug_assert!(basis.iter().all(|v| {
            let bits: Vec<u8> = (0..self.n)
                .map(|i| (v[i / 64] >> (i % 64) & 1) as u8)
                .collect();
            self.syndrome_ok(&bits)
        }));
        basis
    }
}

/// Parses the plain-text alist format: `n m`, max degrees, per-variable and
/// per-check degree lists, then 1-indexed adjacency lines (zero padding
/// entries are ignored).
pub fn parse_alist(text: &str) -> Result<ParityCheckCode, CodeError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let mut next_ints = |expect: &str| -> Result<(usize, Vec<i64>), CodeError> {
        let (lno, line) = lines.next().ok_or_else(|| CodeError::Parse {
            line: 0,
            msg: format!("missing {expect}"),
        })?;
        let vals: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
        let vals = vals.map_err(|e| CodeError::Parse {
            line: lno + 1,
            msg: format!("bad integer in {expect}: {e}"),
        })?;
        Ok((lno + 1, vals))
    };

    let (lno, header) = next_ints("header")?;
    if header.len() != 2 || header[0] <= 0 || header[1] <= 0 {
        return Err(CodeError::Parse {
            line: lno,
            msg: "header must be `n m`".into(),
        });
    }
    let (n, m) = (header[0] as usize, header[1] as usize);
    let (lno, maxdeg) = next_ints("max degrees")?;
    if maxdeg.len() != 2 {
        return Err(CodeError::Parse {
            line: lno,
            msg: "expected `max_dv max_dc`".into(),
        });
    }
    let (max_dv, max_dc) = (maxdeg[0] as usize, maxdeg[1] as usize);
    let (lno, var_deg) = next_ints("variable degree list")?;
    if var_deg.len() != n {
        return Err(CodeError::Parse {
            line: lno,
            msg: format!("expected {n} variable degrees"),
        });
    }
    let (lno, chk_deg) = next_ints("check degree list")?;
    if chk_deg.len() != m {
        return Err(CodeError::Parse {
            line: lno,
            msg: format!("expected {m} check degrees"),
        });
    }

    let mut read_block = |count: usize,
                          degrees: &[i64],
                          max_deg: usize,
                          limit: usize,
                          what: &str|
     -> Result<Vec<Vec<u32>>, CodeError> {
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let (lno, vals) = next_ints(what)?;
            let deg = degrees[i] as usize;
            if vals.len() != deg && vals.len() != max_deg {
                return Err(CodeError::Parse {
                    line: lno,
                    msg: format!(
                        "{what} {i}: expected {deg} (or {max_deg} padded) entries, got {}",
                        vals.len()
                    ),
                });
            }
            let mut adj = Vec::with_capacity(deg);
            for &v in &vals {
                if v == 0 {
                    continue; // zero padding
                }
                if v < 0 || v as usize > limit {
                    return Err(CodeError::IndexOutOfRange {
                        line: lno,
                        value: v,
                    });
                }
                adj.push(v as u32 - 1);
            }
            if adj.len() != deg {
                return Err(CodeError::Parse {
                    line: lno,
                    msg: format!("{what} {i}: {} nonzero entries but degree {deg}", adj.len()),
                });
            }
            out.push(adj);
        }
        Ok(out)
    };

    let var_adj = read_block(n, &var_deg, max_dv, m, "variable adjacency")?;
    let chk_adj = read_block(m, &chk_deg, max_dc, n, "check adjacency")?;

    // cross-check the two adjacency blocks
    for (v, checks) in var_adj.iter().enumerate() {
        for &c in checks {
            if !chk_adj[c as usize].contains(&(v as u32)) {
                return Err(CodeError::InconsistentAdjacency {
                    var: v,
                    check: c as usize,
                });
            }
        }
    }
    let total_v: usize = var_adj.iter().map(Vec::len).sum();
    let total_c: usize = chk_adj.iter().map(Vec::len).sum();
    if total_v != total_c {
        return Err(CodeError::Parse {
            line: 0,
            msg: format!("edge counts disagree: {total_v} from variables, {total_c} from checks"),
        });
    }

    ParityCheckCode::from_adjacency(n, chk_adj)
}

pub fn parse_alist_file(path: &Path) -> Result<ParityCheckCode, CodeError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CodeError::Io(format!("{path:?}: {e}")))?;
    parse_alist(&text)
}

/// Samples a random `(d_v, d_c)`-regular Tanner graph on `n` variables via
/// the configuration model, with local edge swaps to remove repeated edges.
pub fn random_regular_code(
    n: usize,
    d_v: usize,
    d_c: usize,
    seed: u64,
) -> Result<ParityCheckCode, CodeError> {
    if n == 0 || d_v == 0 || d_c == 0 || (n * d_v) % d_c != 0 {
        return Err(CodeError::BadConstruction(format!(
            "cannot build a ({d_v},{d_c})-regular graph on {n} variables"
        )));
    }
    let m = n * d_v / d_c;
    let e_total = n * d_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // var stubs shuffled against check stubs in order
    let mut var_of_stub: Vec<u32> = (0..e_total).map(|i| (i / d_v) as u32).collect();
    for i in (1..e_total).rev() {
        let j = rng.gen_range(0..=i);
        var_of_stub.swap(i, j);
    }
    // edge s belongs to check s / d_c
    let mut pair_set: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let check_of = |e: usize| (e / d_c) as u32;
    for (e, &v) in var_of_stub.iter().enumerate() {
        pair_set.insert((v, check_of(e)));
    }
    let mut attempts = 0usize;
    loop {
        let mut dup: Option<usize> = None;
        let mut seen: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
        for (e, &v) in var_of_stub.iter().enumerate() {
            if !seen.insert((v, check_of(e))) {
                dup = Some(e);
                break;
            }
        }
        let Some(e) = dup else { break };
        // swap the variable endpoints of the duplicate and a random edge
        loop {
            attempts += 1;
            if attempts > 100 * e_total {
                return Err(CodeError::BadConstruction(
                    "edge-swap repair did not converge".into(),
                ));
            }
            let f = rng.gen_range(0..e_total);
            if f == e {
                continue;
            }
            let (ve, vf) = (var_of_stub[e], var_of_stub[f]);
            let (ce, cf) = (check_of(e), check_of(f));
            if pair_set.contains(&(ve, cf)) || pair_set.contains(&(vf, ce)) {
                continue;
            }
            var_of_stub.swap(e, f);
            pair_set.clear();
            for (g, &v) in var_of_stub.iter().enumerate() {
                pair_set.insert((v, check_of(g)));
            }
            break;
        }
    }
    let mut adj = vec![Vec::with_capacity(d_c); m];
    for (e, &v) in var_of_stub.iter().enumerate() {
        adj[e / d_c].push(v);
    }
    ParityCheckCode::from_adjacency(n, adj)
}
