//! Sealed hidden-input oracles.
//!
//! Each oracle owns its hidden string and its [`QueryLedger`]; algorithms see
//! only the query methods, so every bit of information they extract is
//! paid for. Two kinds of calls exist on each oracle: ordinary queries and
//! verification queries, which answer the same question but are counted
//! separately.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cgt_quantum::measurement_sample;
use crate::error::{Error, Result};
use crate::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Wildcard,
    Cgt,
    Verification,
}

/// Oracle answer as recorded in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Bit(u8),
    /// Measured outcome of a coherent phase query.
    Outcome(BitString),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub kind: QueryKind,
    pub subset: BitString,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pattern: Option<BitString>,
    pub response: Response,
    /// Total queries charged so far, this one included.
    pub running_count: u64,
}

/// Per-trial count of oracle calls by kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub wildcard: u64,
    pub cgt: u64,
    pub verification: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEntry>>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_trace() -> Self {
        Self {
            trace: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn total(&self) -> u64 {
        self.wildcard + self.cgt + self.verification
    }

    pub fn count(&self, kind: QueryKind) -> u64 {
        match kind {
            QueryKind::Wildcard => self.wildcard,
            QueryKind::Cgt => self.cgt,
            QueryKind::Verification => self.verification,
        }
    }

    /// One JSON document per recorded query.
    pub fn trace_json_lines(&self) -> Vec<String> {
        self.trace
            .iter()
            .flatten()
            .map(|e| serde_json::to_string(e).expect("trace entries serialize"))
            .collect()
    }

    fn charge(&mut self, kind: QueryKind, subset: &BitString, pattern: Option<&BitString>, response: Response) {
        match kind {
            QueryKind::Wildcard => self.wildcard += 1,
            QueryKind::Cgt => self.cgt += 1,
            QueryKind::Verification => self.verification += 1,
        }
        let running_count = self.total();
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                kind,
                subset: subset.clone(),
                pattern: pattern.cloned(),
                response,
                running_count,
            });
        }
    }
}

/// A pair `(S, y)`: is the hidden string equal to `y` on the positions `S`?
///
/// Both are full-length strings; `pattern` is zero outside `subset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WildcardQuery {
    subset: BitString,
    pattern: BitString,
}

impl WildcardQuery {
    pub fn new(subset: BitString, pattern: BitString) -> Result<Self> {
        if subset.len() != pattern.len() {
            return Err(Error::MalformedQuery(format!(
                "subset has length {}, pattern {}",
                subset.len(),
                pattern.len()
            )));
        }
        if !pattern.is_subset_of(&subset) {
            return Err(Error::MalformedQuery("pattern has ones outside the subset".into()));
        }
        Ok(Self { subset, pattern })
    }

    /// Query asking whether `x_i = b` for every listed `(i, b)`.
    pub fn from_assignments<I>(n: usize, assignments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, bool)>,
    {
        let mut subset = BitString::zeros(n);
        let mut pattern = BitString::zeros(n);
        for (i, b) in assignments {
            if i >= n {
                return Err(Error::MalformedQuery(format!("index {i} out of range for length {n}")));
            }
            subset.set(i, true);
            pattern.set(i, b);
        }
        Ok(Self { subset, pattern })
    }

    pub fn subset(&self) -> &BitString {
        &self.subset
    }

    pub fn pattern(&self) -> &BitString {
        &self.pattern
    }
}

/// Sealed input for search with wildcards.
#[derive(Debug, Clone)]
pub struct WildcardOracle {
    hidden: BitString,
    ledger: QueryLedger,
    /// Positions whose values some answered query has pinned down.
    established: BitString,
}

impl WildcardOracle {
    pub fn new(hidden: BitString) -> Self {
        Self::with_ledger(hidden, QueryLedger::new())
    }

    pub fn with_ledger(hidden: BitString, ledger: QueryLedger) -> Self {
        let established = BitString::zeros(hidden.len());
        Self {
            hidden,
            ledger,
            established,
        }
    }

    pub fn n(&self) -> usize {
        self.hidden.len()
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    /// `1` iff `x_S = y`; charged as a wildcard query.
    pub fn query(&mut self, q: &WildcardQuery) -> Result<bool> {
        self.ask(q, QueryKind::Wildcard)
    }

    /// Same question, charged as a verification query.
    pub fn verify(&mut self, q: &WildcardQuery) -> Result<bool> {
        self.ask(q, QueryKind::Verification)
    }

    fn ask(&mut self, q: &WildcardQuery, kind: QueryKind) -> Result<bool> {
        if q.subset.len() != self.n() {
            return Err(Error::MalformedQuery(format!(
                "query over {} positions, oracle has {}",
                q.subset.len(),
                self.n()
            )));
        }
        let answer = self.hidden.agrees_on(&q.pattern, &q.subset);
        if answer || q.subset.weight() == 1 {
            self.established = self.established.or(&q.subset);
        }
        self.ledger
            .charge(kind, &q.subset, Some(&q.pattern), Response::Bit(answer as u8));
        Ok(answer)
    }

    /// Outcome of the Pretty Good Measurement on the subset state over
    /// `window`: the true values there with exactly `errors` of them flipped,
    /// uniformly at random. Costs no queries.
    ///
    /// The measurement discriminates inputs that agree with a known string on
    /// `known` of the window positions, so that many positions of the window
    /// must already be established by answered queries.
    pub fn measure_pgm<R: Rng + ?Sized>(
        &self,
        window: &[usize],
        known: usize,
        errors: usize,
        rng: &mut R,
    ) -> Result<BitString> {
        let mut established = 0;
        for &i in window {
            if i >= self.n() {
                return Err(Error::MalformedQuery(format!("window index {i} out of range")));
            }
            established += self.established.get(i) as usize;
        }
        if established < known {
            return Err(Error::Contract(format!(
                "measurement needs {known} established positions, window has {established}"
            )));
        }
        if errors > window.len() {
            return Err(Error::Contract(format!(
                "{errors} errors do not fit a window of {}",
                window.len()
            )));
        }
        let noise = BitString::random_with_weight(window.len(), errors, rng)?;
        Ok(self.hidden.restrict(window).xor(&noise))
    }
}

/// Sealed input for combinatorial group testing.
#[derive(Debug, Clone)]
pub struct CgtOracle {
    hidden: BitString,
    ledger: QueryLedger,
}

impl CgtOracle {
    pub fn new(hidden: BitString) -> Self {
        Self::with_ledger(hidden, QueryLedger::new())
    }

    pub fn with_ledger(hidden: BitString, ledger: QueryLedger) -> Self {
        Self { hidden, ledger }
    }

    pub fn n(&self) -> usize {
        self.hidden.len()
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    /// `1` iff some `i ∈ S` has `x_i = 1`; charged as a CGT query.
    pub fn query(&mut self, subset: &BitString) -> Result<bool> {
        self.ask(subset, QueryKind::Cgt)
    }

    /// Same question, charged as a verification query.
    pub fn verify(&mut self, subset: &BitString) -> Result<bool> {
        self.ask(subset, QueryKind::Verification)
    }

    fn ask(&mut self, subset: &BitString, kind: QueryKind) -> Result<bool> {
        self.check(subset)?;
        let answer = self.hidden.and_weight(subset) > 0;
        self.ledger.charge(kind, subset, None, Response::Bit(answer as u8));
        Ok(answer)
    }

    /// One coherent query `|S⟩|y⟩ ↦ (-1)^{Q_x(S)}` followed by a Hadamard
    /// measurement, sampled from its exact outcome law. The outcome is
    /// supported on `x ∧ S`. Charged as one CGT query.
    pub fn phase_query<R: Rng + ?Sized>(&mut self, subset: &BitString, rng: &mut R) -> Result<BitString> {
        self.check(subset)?;
        let support: Vec<usize> = self.hidden.and(subset).iter_ones().collect();
        let outcome = measurement_sample(self.n(), &support, rng)?;
        self.ledger
            .charge(QueryKind::Cgt, subset, None, Response::Outcome(outcome.clone()));
        Ok(outcome)
    }

    fn check(&self, subset: &BitString) -> Result<()> {
        if subset.len() != self.n() {
            return Err(Error::MalformedQuery(format!(
                "subset over {} positions, oracle has {}",
                subset.len(),
                self.n()
            )));
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn hidden(&self) -> &BitString {
        &self.hidden
    }
}

/// Block encoding of a wildcard instance `z ∈ {0,1}^k` as a CGT input on
/// `2k + padding` positions: block `i` is `{2i, 2i+1}` and holds a single 1,
/// at `2i` when `z_i = 0` and at `2i + 1` when `z_i = 1`. Padding is zero.
pub fn encode_wildcards(z: &BitString, padding: usize) -> BitString {
    let mut x = BitString::zeros(2 * z.len() + padding);
    for i in 0..z.len() {
        x.set(2 * i + z.get(i) as usize, true);
    }
    x
}

/// Inverse of [`encode_wildcards`]; rejects strings that are not one-hot per
/// block or have ones in the padding.
pub fn decode_wildcards(x: &BitString, k: usize) -> Result<BitString> {
    if x.len() < 2 * k {
        return Err(Error::Consistency(format!(
            "{} positions cannot hold {k} blocks",
            x.len()
        )));
    }
    let mut z = BitString::zeros(k);
    for i in 0..k {
        match (x.get(2 * i), x.get(2 * i + 1)) {
            (true, false) => {}
            (false, true) => z.set(i, true),
            _ => return Err(Error::Consistency(format!("block {i} is not one-hot"))),
        }
    }
    if x.iter_ones().any(|i| i >= 2 * k) {
        return Err(Error::Consistency("padding carries a one".into()));
    }
    Ok(z)
}

/// CGT set answering the wildcard query `q` against `z̄`: for each `i ∈ S`
/// take `2i` when `y_i = 0` and `2i + 1` when `y_i = 1`. The CGT answer is 1
/// iff `z_i = y_i` for some `i ∈ S`, i.e. iff `z̄_S ≠ y`.
pub fn wildcard_to_cgt_set(q: &WildcardQuery, padding: usize) -> BitString {
    let k = q.subset().len();
    let mut set = BitString::zeros(2 * k + padding);
    for i in q.subset().iter_ones() {
        set.set(2 * i + q.pattern().get(i) as usize, true);
    }
    set
}

/// Wildcard instance `z` exposed through a CGT oracle on its block encoding.
#[derive(Debug, Clone)]
pub struct WildcardsViaCgt {
    k: usize,
    padding: usize,
    oracle: CgtOracle,
}

impl WildcardsViaCgt {
    pub fn new(z: BitString, padding: usize) -> Result<Self> {
        Self::with_ledger(z, padding, QueryLedger::new())
    }

    pub fn with_ledger(z: BitString, padding: usize, ledger: QueryLedger) -> Result<Self> {
        if z.is_empty() {
            return Err(crate::error::param("wildcard instance needs k >= 1"));
        }
        Ok(Self {
            k: z.len(),
            padding,
            oracle: CgtOracle::with_ledger(encode_wildcards(&z, padding), ledger),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// The underlying CGT oracle, for running a CGT solver.
    pub fn cgt(&mut self) -> &mut CgtOracle {
        &mut self.oracle
    }

    /// Answers the wildcard query `q` on `z̄` with one CGT query.
    pub fn query_complement(&mut self, q: &WildcardQuery) -> Result<bool> {
        if q.subset().len() != self.k {
            return Err(Error::MalformedQuery(format!(
                "query over {} positions, instance has {}",
                q.subset().len(),
                self.k
            )));
        }
        let set = wildcard_to_cgt_set(q, self.padding);
        Ok(!self.oracle.query(&set)?)
    }

    /// Decodes the output of a CGT solver back to `z`.
    pub fn decode(&self, x: &BitString) -> Result<BitString> {
        decode_wildcards(x, self.k)
    }

    pub fn ledger(&self) -> &QueryLedger {
        self.oracle.ledger()
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.oracle.into_ledger()
    }
}
