use nalgebra::DMatrix;

use crate::qstate::linalg::{hermitize, identity, trace};
use crate::qstate::{tensor, Factor, Party, QState, SystemLayout};
use crate::{CMatrix, Error, Result};

use super::{Channel, Instrument, PRUNE_NORM};

/// One party applies an instrument to factors it owns; the outcome is
/// broadcast and selects the branch that runs next.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    party: Party,
    targets: Vec<usize>,
    instrument: Instrument,
    branches: Vec<LoccProtocol>,
}

impl Round {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn instrument(&self) -> &Instrument {
        &self.instrument
    }

    /// Empty when every outcome continues with the following steps only.
    pub fn branches(&self) -> &[LoccProtocol] {
        &self.branches
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Round(Round),
    /// A sub-protocol run on the listed factors.
    Embedded {
        targets: Vec<usize>,
        protocol: Box<LoccProtocol>,
    },
    /// Factors thrown away.
    Discard(Vec<usize>),
    /// Bookkeeping reorder: new factor `p` is old factor `perm[p]`.
    Reorder(Vec<usize>),
}

/// Finite LOCC protocol tree. Every constructor checks locality, so a
/// value of this type is LOCC by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LoccProtocol {
    input: SystemLayout,
    output: SystemLayout,
    steps: Vec<Step>,
}

/// One leaf of a protocol run: the outcome labels along the path, its
/// probability and the normalized conditional state.
#[derive(Clone, Debug)]
pub struct Branch {
    pub labels: Vec<String>,
    pub probability: f64,
    pub state: QState,
}

impl LoccProtocol {
    /// Does nothing.
    pub fn identity(layout: SystemLayout) -> Self {
        LoccProtocol {
            input: layout.clone(),
            output: layout,
            steps: Vec::new(),
        }
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Appends a round. `branches` is empty or has one protocol per
    /// outcome, all with the same output layout.
    pub fn round(
        mut self,
        party: Party,
        targets: &[usize],
        instrument: Instrument,
        branches: Vec<LoccProtocol>,
    ) -> Result<Self> {
        let cur = &self.output;
        cur.check_indices(targets)?;
        for &t in targets {
            let f = cur.factor(t)?;
            if f.party != party {
                return Err(Error::Locality(format!(
                    "party {party} acts on factor {t} owned by {}",
                    f.party
                )));
            }
        }
        let sub = cur.select(targets)?;
        if !sub.same_profile(instrument.input()) {
            return Err(Error::LayoutMismatch(format!(
                "instrument expects {}, factors {targets:?} are {sub}",
                instrument.input()
            )));
        }
        if let Some(f) = instrument.output().factors().iter().find(|f| f.party != party) {
            return Err(Error::Locality(format!(
                "party {party} would create a factor owned by {}",
                f.party
            )));
        }
        let mid = replaced_layout(cur, targets, instrument.output().factors())?;
        let next = if branches.is_empty() {
            mid
        } else {
            if branches.len() != instrument.len() {
                return Err(Error::LayoutMismatch(format!(
                    "{} branches for {} outcomes",
                    branches.len(),
                    instrument.len()
                )));
            }
            let out = branches[0].output.clone();
            for (k, b) in branches.iter().enumerate() {
                if !b.input.same_profile(&mid) {
                    return Err(Error::LayoutMismatch(format!(
                        "branch {k} starts on {}, expected {mid}",
                        b.input
                    )));
                }
                if !b.output.same_profile(&out) {
                    return Err(Error::LayoutMismatch(format!(
                        "branch {k} ends on {}, branch 0 on {out}",
                        b.output
                    )));
                }
            }
            out
        };
        self.steps.push(Step::Round(Round {
            party,
            targets: targets.to_vec(),
            instrument,
            branches,
        }));
        self.output = next;
        Ok(self)
    }

    /// Deterministic local operation given by Kraus operators on `targets`,
    /// producing factors of dims `out_dims` owned by `party`.
    pub fn local_ops(self, party: Party, targets: &[usize], kraus: Vec<CMatrix>, out_dims: &[usize]) -> Result<Self> {
        self.measure(party, targets, vec![(String::new(), kraus)], out_dims, Vec::new())
    }

    /// Local unitary on `targets`.
    pub fn local_unitary(self, party: Party, targets: &[usize], u: CMatrix) -> Result<Self> {
        let dims: Vec<usize> = targets
            .iter()
            .map(|&t| self.output.factor(t).map(|f| f.dim))
            .collect::<Result<_>>()?;
        self.local_ops(party, targets, vec![u], &dims)
    }

    /// Local measurement with outcomes given as Kraus lists; layouts are
    /// derived from the current layout.
    pub fn measure(
        self,
        party: Party,
        targets: &[usize],
        outcomes: Vec<(String, Vec<CMatrix>)>,
        out_dims: &[usize],
        branches: Vec<LoccProtocol>,
    ) -> Result<Self> {
        let input = self.output.select(targets)?;
        let output = SystemLayout::new(out_dims.iter().map(|&d| Factor::new(party, d)).collect())?;
        let inst = Instrument::from_kraus(input, output, outcomes)?;
        self.round(party, targets, inst, branches)
    }

    /// Runs `sub` on the listed factors.
    pub fn embed(mut self, targets: &[usize], sub: LoccProtocol) -> Result<Self> {
        let sel = self.output.select(targets)?;
        if !sel.same_profile(&sub.input) {
            return Err(Error::LayoutMismatch(format!(
                "sub-protocol expects {}, factors {targets:?} are {sel}",
                sub.input
            )));
        }
        let next = replaced_layout(&self.output, targets, sub.output.factors())?;
        self.steps.push(Step::Embedded {
            targets: targets.to_vec(),
            protocol: Box::new(sub),
        });
        self.output = next;
        Ok(self)
    }

    pub fn discard(mut self, drop: &[usize]) -> Result<Self> {
        if drop.is_empty() {
            return Ok(self);
        }
        self.output.check_indices(drop)?;
        let keep = self.output.complement(drop);
        self.output = self.output.select(&keep)?;
        self.steps.push(Step::Discard(drop.to_vec()));
        Ok(self)
    }

    pub fn reorder(mut self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.output.len() {
            return Err(Error::LayoutMismatch("reorder must list every factor".into()));
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self);
        }
        self.output = self.output.select(perm)?;
        self.steps.push(Step::Reorder(perm.to_vec()));
        Ok(self)
    }

    /// Keeps only `keep`, in the listed order.
    pub fn with_output(self, keep: &[usize]) -> Result<Self> {
        self.output.check_indices(keep)?;
        let drop = self.output.complement(keep);
        let n_before = self.output.len();
        let p = self.discard(&drop)?;
        // position of each kept factor after the discard
        let kept_sorted: Vec<usize> = (0..n_before).filter(|i| keep.contains(i)).collect();
        let perm: Vec<usize> = keep
            .iter()
            .map(|k| kept_sorted.iter().position(|x| x == k).expect("kept"))
            .collect();
        p.reorder(&perm)
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: LoccProtocol) -> Result<Self> {
        if !self.output.same_profile(&next.input) {
            return Err(Error::LayoutMismatch(format!(
                "cannot follow a protocol ending on {} with one starting on {}",
                self.output, next.input
            )));
        }
        self.steps.extend(next.steps);
        self.output = next.output;
        Ok(self)
    }

    /// Applies the protocol, averaging over all outcomes.
    pub fn run(&self, s: &QState) -> Result<QState> {
        self.check_input(s)?;
        let m = self.run_raw(s.matrix().clone(), 1);
        Ok(QState::from_parts(self.output.clone(), hermitize(&m)))
    }

    fn check_input(&self, s: &QState) -> Result<()> {
        if !s.layout().same_profile(&self.input) {
            return Err(Error::LayoutMismatch(format!(
                "protocol starts on {}, state is on {}",
                self.input,
                s.layout()
            )));
        }
        Ok(())
    }

    /// Runs on an unnormalized matrix on `prefix ⊗ input`, with a spectator
    /// prefix of dimension `prefix` as the most significant factor.
    fn run_raw(&self, m: CMatrix, prefix: usize) -> CMatrix {
        let mut m = m;
        let mut layout = self.input.clone();
        for step in &self.steps {
            let mut dims = vec![prefix];
            dims.extend(layout.dims());
            match step {
                Step::Round(r) => {
                    let shifted: Vec<usize> = r.targets.iter().map(|t| t + 1).collect();
                    let out_dims = r.instrument.output().dims();
                    let mid = replaced_layout(&layout, &r.targets, r.instrument.output().factors())
                        .expect("validated at construction");
                    if r.branches.is_empty() {
                        let kraus: Vec<CMatrix> = r
                            .instrument
                            .outcomes()
                            .iter()
                            .flat_map(|(_, c)| c.kraus().iter().cloned())
                            .collect();
                        m = tensor::apply_kraus(&m, &dims, &shifted, &kraus, &out_dims);
                        layout = mid;
                    } else {
                        let mut acc: Option<CMatrix> = None;
                        for ((_, ch), branch) in r.instrument.outcomes().iter().zip(&r.branches) {
                            let mk = tensor::apply_kraus(&m, &dims, &shifted, ch.kraus(), &out_dims);
                            if mk.norm() == 0.0 {
                                continue;
                            }
                            let out = branch.run_raw(mk, prefix);
                            acc = Some(match acc {
                                Some(a) => a + out,
                                None => out,
                            });
                        }
                        layout = r.branches[0].output.clone();
                        let d = prefix * layout.total_dim();
                        m = acc.unwrap_or_else(|| DMatrix::zeros(d, d));
                    }
                }
                Step::Embedded { targets, protocol } => {
                    // move targets last, fold everything else into the prefix
                    let n = layout.len();
                    let rest: Vec<usize> = (0..n).filter(|f| !targets.contains(f)).collect();
                    let mut perm = vec![0];
                    perm.extend(rest.iter().map(|f| f + 1));
                    perm.extend(targets.iter().map(|f| f + 1));
                    let work = tensor::permute(&m, &dims, &perm);
                    let dr: usize = rest.iter().map(|&f| layout.dims()[f]).product();
                    let out = protocol.run_raw(work, prefix * dr);
                    let mut work_dims = vec![prefix];
                    work_dims.extend(rest.iter().map(|&f| layout.dims()[f]));
                    work_dims.extend(protocol.output.dims());
                    let next = replaced_layout(&layout, targets, protocol.output.factors())
                        .expect("validated at construction");
                    let back = restore_perm(n, targets, protocol.output.len());
                    let mut full_back = vec![0];
                    full_back.extend(back.iter().map(|p| p + 1));
                    m = tensor::permute(&out, &work_dims, &full_back);
                    layout = next;
                }
                Step::Discard(drop) => {
                    let keep = layout.complement(drop);
                    let mut k = vec![0];
                    k.extend(keep.iter().map(|f| f + 1));
                    m = tensor::partial_trace(&m, &dims, &k);
                    layout = layout.select(&keep).expect("validated");
                }
                Step::Reorder(perm) => {
                    let mut p = vec![0];
                    p.extend(perm.iter().map(|f| f + 1));
                    m = tensor::permute(&m, &dims, &p);
                    layout = layout.select(perm).expect("validated");
                }
            }
        }
        m
    }

    /// Every outcome path with its probability and conditional state.
    /// Paths of probability below `1e-14` are dropped.
    pub fn branches(&self, s: &QState) -> Result<Vec<Branch>> {
        self.check_input(s)?;
        let leaves = self.flatten_ops();
        let mut out: Vec<Branch> = Vec::new();
        let mut acc: Vec<(Vec<String>, CMatrix)> = Vec::new();
        for (labels, k) in leaves {
            let m = &k * s.matrix() * k.adjoint();
            match acc.iter_mut().find(|(l, _)| *l == labels) {
                Some((_, a)) => *a += m,
                None => acc.push((labels, m)),
            }
        }
        for (labels, m) in acc {
            let p = trace(&m).re;
            if p < 1e-14 {
                continue;
            }
            out.push(Branch {
                labels,
                probability: p,
                state: QState::from_parts(self.output.clone(), hermitize(&(m / crate::qstate::linalg::c(p)))),
            });
        }
        Ok(out)
    }

    /// Kraus operators of every leaf on the full input space, tagged with
    /// the outcome labels along the path. Labels of deterministic rounds
    /// (empty strings) are omitted.
    pub fn flatten_ops(&self) -> Vec<(Vec<String>, CMatrix)> {
        let d = self.input.total_dim();
        let mut ops: Vec<(Vec<String>, CMatrix)> = vec![(Vec::new(), identity(d))];
        let mut layout = self.input.clone();
        for step in &self.steps {
            let dims = layout.dims();
            match step {
                Step::Round(r) => {
                    let out_dims = r.instrument.output().dims();
                    let mid = replaced_layout(&layout, &r.targets, r.instrument.output().factors())
                        .expect("validated");
                    let mut next = Vec::new();
                    for (k, (label, ch)) in r.instrument.outcomes().iter().enumerate() {
                        let fulls: Vec<CMatrix> = ch
                            .kraus()
                            .iter()
                            .map(|kr| tensor::embed_rect(kr, &dims, &r.targets, &out_dims))
                            .collect();
                        let tails: Vec<(Vec<String>, CMatrix)> = match r.branches.get(k) {
                            Some(b) => b.flatten_ops(),
                            None => vec![(Vec::new(), identity(mid.total_dim()))],
                        };
                        for (labels, a) in &ops {
                            for f in &fulls {
                                let fa = f * a;
                                if fa.norm() < PRUNE_NORM {
                                    continue;
                                }
                                for (tl, t) in &tails {
                                    let op = t * &fa;
                                    if op.norm() < PRUNE_NORM {
                                        continue;
                                    }
                                    let mut l = labels.clone();
                                    if !label.is_empty() {
                                        l.push(label.clone());
                                    }
                                    l.extend(tl.iter().cloned());
                                    next.push((l, op));
                                }
                            }
                        }
                    }
                    ops = next;
                    layout = match r.branches.first() {
                        Some(b) => b.output.clone(),
                        None => mid,
                    };
                }
                Step::Embedded { targets, protocol } => {
                    let out_dims = protocol.output.dims();
                    let subs: Vec<(Vec<String>, CMatrix)> = protocol
                        .flatten_ops()
                        .into_iter()
                        .map(|(l, k)| (l, tensor::embed_rect(&k, &dims, targets, &out_dims)))
                        .collect();
                    let mut next = Vec::new();
                    for (labels, a) in &ops {
                        for (sl, s) in &subs {
                            let op = s * a;
                            if op.norm() < PRUNE_NORM {
                                continue;
                            }
                            let mut l = labels.clone();
                            l.extend(sl.iter().cloned());
                            next.push((l, op));
                        }
                    }
                    ops = next;
                    layout = replaced_layout(&layout, targets, protocol.output.factors()).expect("validated");
                }
                Step::Discard(drop) => {
                    let dd: usize = drop.iter().map(|&f| dims[f]).product();
                    let mut next = Vec::new();
                    for i in 0..dd {
                        let mut bra = DMatrix::zeros(1, dd);
                        bra[(0, i)] = crate::qstate::linalg::c(1.0);
                        let f = tensor::embed_rect(&bra, &dims, drop, &[]);
                        for (labels, a) in &ops {
                            let op = &f * a;
                            if op.norm() >= PRUNE_NORM {
                                next.push((labels.clone(), op));
                            }
                        }
                    }
                    ops = next;
                    layout = layout.select(&layout.complement(drop)).expect("validated");
                }
                Step::Reorder(perm) => {
                    let map = tensor::index_map(&dims, perm);
                    let p = permutation_matrix(&map);
                    ops = ops.into_iter().map(|(l, a)| (l, &p * a)).collect();
                    layout = layout.select(perm).expect("validated");
                }
            }
        }
        ops
    }

    /// The whole protocol as one trace-preserving channel.
    pub fn flatten(&self) -> Result<Channel> {
        let kraus = self.flatten_ops().into_iter().map(|(_, k)| k).collect();
        Channel::new(self.input.clone(), self.output.clone(), kraus)
    }

    /// The protocol as an instrument whose outcomes are the label paths
    /// joined with `/`.
    pub fn to_instrument(&self) -> Result<Instrument> {
        let mut groups: Vec<(String, Vec<CMatrix>)> = Vec::new();
        for (labels, k) in self.flatten_ops() {
            let key = labels.join("/");
            match groups.iter_mut().find(|(l, _)| *l == key) {
                Some((_, v)) => v.push(k),
                None => groups.push((key, vec![k])),
            }
        }
        Instrument::from_kraus(self.input.clone(), self.output.clone(), groups)
    }

    /// The whole protocol as a channel that also writes the outcome path
    /// into a classical register factor owned by `party`, appended last.
    /// Returns the channel and the label path of each register value.
    pub fn flatten_recording(&self, party: Party) -> Result<(Channel, Vec<String>)> {
        let inst = self.to_instrument()?;
        let n = inst.len();
        let reg = SystemLayout::single(party, n)?;
        let output = self.output.concat(&reg)?;
        let mut kraus = Vec::new();
        let mut labels = Vec::with_capacity(n);
        for (i, (label, ch)) in inst.outcomes().iter().enumerate() {
            let mut ket = DMatrix::zeros(n, 1);
            ket[(i, 0)] = crate::qstate::linalg::c(1.0);
            for k in ch.kraus() {
                kraus.push(k.kronecker(&ket));
            }
            labels.push(label.clone());
        }
        Ok((Channel::new(self.input.clone(), output, kraus)?, labels))
    }

    /// Number of rounds, counting nested ones.
    pub fn round_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Round(r) => 1 + r.branches.iter().map(|b| b.round_count()).max().unwrap_or(0),
                Step::Embedded { protocol, .. } => protocol.round_count(),
                _ => 0,
            })
            .sum()
    }
}

/// `Σ_a |a⟩⟨map[a]|`.
pub(crate) fn permutation_matrix(map: &[usize]) -> CMatrix {
    let n = map.len();
    let mut p = DMatrix::zeros(n, n);
    for (a, &b) in map.iter().enumerate() {
        p[(a, b)] = crate::qstate::linalg::c(1.0);
    }
    p
}

pub(crate) fn replaced_layout(layout: &SystemLayout, targets: &[usize], out: &[Factor]) -> Result<SystemLayout> {
    crate::qstate::replaced_layout(layout, targets, out)
}

fn restore_perm(n: usize, targets: &[usize], n_out: usize) -> Vec<usize> {
    tensor::restore_perm(n, targets, n_out)
}
