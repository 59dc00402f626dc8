#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selfx_core::kb::{KnowledgeBase, LinkKind, Origin};

/// Id-free view of a KB: refined instance colors and link triples, both
/// sorted. Equal views mean the fact graphs agree up to id renaming.
#[derive(Debug, PartialEq, Eq)]
pub struct Canonical {
    pub instances: Vec<u64>,
    pub links: Vec<(String, u64, u64)>,
}

fn hash_of(v: &impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

fn kind_label(kb: &KnowledgeBase, kind: LinkKind) -> String {
    match kind {
        LinkKind::Role(r) => format!("role:{}", kb.role(r).name),
        LinkKind::Has(c) => format!("has:{}", kb.class_name(c)),
    }
}

/// Colour refinement over instances; `asserted_only` drops inferred facts.
pub fn canonical(kb: &KnowledgeBase, asserted_only: bool) -> Canonical {
    let keep = |o: Origin| !asserted_only || o == Origin::Asserted;
    let insts: Vec<_> = kb.instances().filter(|i| keep(i.origin)).collect();
    let links: Vec<_> = kb.links().filter(|l| keep(l.origin)).collect();
    let mut color: HashMap<_, u64> = insts
        .iter()
        .map(|i| {
            let value = i.value.as_ref().map(|v| v.to_string());
            let overlay = i.inferred_value.as_ref().filter(|_| !asserted_only).map(|(v, _)| v.to_string());
            (i.id, hash_of(&(kb.class_name(i.class), &i.name, value, overlay, i.origin)))
        })
        .collect();
    let mut distinct = 0;
    loop {
        let mut next = HashMap::new();
        for i in &insts {
            let mut around: Vec<(String, bool, u64)> = links
                .iter()
                .filter_map(|l| {
                    if l.source == i.id {
                        Some((kind_label(kb, l.kind), true, color[&l.target]))
                    } else if l.target == i.id {
                        Some((kind_label(kb, l.kind), false, color[&l.source]))
                    } else {
                        None
                    }
                })
                .collect();
            around.sort();
            next.insert(i.id, hash_of(&(color[&i.id], around)));
        }
        color = next;
        let now = color.values().collect::<BTreeSet<_>>().len();
        if now == distinct {
            break;
        }
        distinct = now;
    }
    let mut instances: Vec<u64> = color.values().copied().collect();
    instances.sort();
    let mut triples: Vec<_> = links
        .iter()
        .map(|l| (kind_label(kb, l.kind), color[&l.source], color[&l.target]))
        .collect();
    triples.sort();
    Canonical { instances, links: triples }
}

// ---------------------------------------------------------------------------
// Random realizing scenarios, with a predicate evaluated on the model.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Min(f64),
    Max(f64),
    Exact(f64),
}

impl Bound {
    fn holds(self, x: f64) -> bool {
        match self {
            Bound::Min(b) => x >= b,
            Bound::Max(b) => x <= b,
            Bound::Exact(b) => (x - b).abs() <= 1e-9,
        }
    }

    fn sxdl(self) -> String {
        match self {
            Bound::Min(b) => format!("has Min = {b};"),
            Bound::Max(b) => format!("has Max = {b};"),
            Bound::Exact(b) => format!("has Exact = {b};"),
        }
    }
}

/// (class, parent, category) for the creation classes the generator uses.
const CREATION_CLASSES: [(&str, &str, Category); 8] = [
    ("Signal", "Data", Category::Data),
    ("Information", "Data", Category::Data),
    ("ElectricalPower", "Resource", Category::Resource),
    ("Battery", "ElectricalPower", Category::Resource),
    ("Computation", "Resource", Category::Resource),
    ("Light", "PhysicalPhenomena", Category::Phenomena),
    ("Daylight", "Light", Category::Phenomena),
    ("Sound", "PhysicalPhenomena", Category::Phenomena),
];

const QUANTITIES: [&str; 4] = ["Power", "Voltage", "Intensity", "Wavelength"];
const UNITS: [&str; 2] = ["u", "v"];
const FORMATS: [&str; 3] = ["fa", "fb", "fc"];
const RATES: [&str; 2] = ["FPS", "PS"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Data,
    Resource,
    Phenomena,
}

fn class_descends(class: &str, ancestor: &str) -> bool {
    let mut c = class;
    loop {
        if c == ancestor {
            return true;
        }
        match CREATION_CLASSES.iter().find(|(n, _, _)| *n == c) {
            Some((_, p, _)) => c = p,
            None => return false,
        }
    }
}

fn category(class: &str) -> Category {
    CREATION_CLASSES.iter().find(|(n, _, _)| *n == class).unwrap().2
}

/// An offered attribute: its own value and `Exact` children.
#[derive(Debug, Clone)]
pub struct Offer {
    pub class: &'static str,
    pub unit: Option<&'static str>,
    pub own: Option<f64>,
    pub exacts: Vec<f64>,
}

impl Offer {
    fn amounts(&self) -> Vec<f64> {
        self.own.into_iter().chain(self.exacts.iter().copied()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Provider {
    pub class: &'static str,
    pub formats: Vec<&'static str>,
    pub offers: Vec<Offer>,
}

/// A featured property: a format text, or a rate/quantity with bounds.
#[derive(Debug, Clone)]
pub enum Want {
    Format(&'static str),
    Rate { class: &'static str, own: Option<f64>, bounds: Vec<Bound> },
    Quantity { class: &'static str, unit: &'static str, bounds: Vec<Bound> },
}

#[derive(Debug, Clone)]
pub struct Request {
    pub class: &'static str,
    /// One featuring per inner vector.
    pub featurings: Vec<Vec<Want>>,
}

#[derive(Debug, Clone)]
pub struct RealizingScenario {
    pub providers: Vec<Provider>,
    pub requests: Vec<Request>,
}

fn small(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0..=10) as f64
}

fn bounds(rng: &mut ChaCha8Rng) -> Vec<Bound> {
    (0..rng.gen_range(0..=2))
        .map(|_| match rng.gen_range(0..3) {
            0 => Bound::Min(small(rng)),
            1 => Bound::Max(small(rng)),
            _ => Bound::Exact(small(rng)),
        })
        .collect()
}

impl RealizingScenario {
    pub fn random(seed: u64) -> Self {
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let classes: Vec<&'static str> = CREATION_CLASSES.iter().map(|c| c.0).collect();
        let providers = (0..rng.gen_range(1..=10))
            .map(|_| {
                let class = *classes.choose(rng).unwrap();
                let mut p = Provider { class, formats: Vec::new(), offers: Vec::new() };
                if category(class) == Category::Data {
                    p.formats = FORMATS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                    for _ in 0..rng.gen_range(0..=2) {
                        let own = rng.gen_bool(0.7).then(|| small(rng));
                        let exacts = if rng.gen_bool(0.3) { vec![small(rng)] } else { Vec::new() };
                        p.offers.push(Offer { class: RATES.choose(rng).unwrap(), unit: None, own, exacts });
                    }
                } else {
                    for _ in 0..rng.gen_range(0..=3) {
                        p.offers.push(Offer {
                            class: QUANTITIES.choose(rng).unwrap(),
                            unit: Some(UNITS.choose(rng).unwrap()),
                            own: None,
                            exacts: (0..rng.gen_range(0..=2)).map(|_| small(rng)).collect(),
                        });
                    }
                }
                p
            })
            .collect();
        let requests = (0..rng.gen_range(1..=10))
            .map(|_| {
                let class = *classes.choose(rng).unwrap();
                let featurings = (0..rng.gen_range(1..=2))
                    .map(|_| {
                        (0..rng.gen_range(0..=3))
                            .map(|_| {
                                if category(class) == Category::Data {
                                    if rng.gen_bool(0.5) {
                                        Want::Format(FORMATS.choose(rng).unwrap())
                                    } else {
                                        Want::Rate {
                                            class: RATES.choose(rng).unwrap(),
                                            own: rng.gen_bool(0.4).then(|| small(rng)),
                                            bounds: bounds(rng),
                                        }
                                    }
                                } else {
                                    Want::Quantity {
                                        class: QUANTITIES.choose(rng).unwrap(),
                                        unit: UNITS.choose(rng).unwrap(),
                                        bounds: bounds(rng),
                                    }
                                }
                            })
                            .collect()
                    })
                    .collect();
                Request { class, featurings }
            })
            .collect();
        RealizingScenario { providers, requests }
    }

    pub fn sxdl(&self) -> String {
        let mut s = String::from("class Battery : ElectricalPower;\nclass Daylight : Light;\n");
        for (i, p) in self.providers.iter().enumerate() {
            writeln!(s, "instance prov{i} : {} {{", p.class).unwrap();
            for f in &p.formats {
                writeln!(s, "  has ROSmsgs = \"{f}\";").unwrap();
            }
            for o in &p.offers {
                let value = match (o.unit, o.own) {
                    (Some(u), _) => format!("\"{u}\""),
                    (None, Some(v)) => v.to_string(),
                    (None, None) => "nan".to_string(),
                };
                let inner: String = o.exacts.iter().map(|e| format!(" has Exact = {e};")).collect();
                writeln!(s, "  has {} = {value} {{{inner} }}", o.class).unwrap();
            }
            writeln!(s, "}}").unwrap();
        }
        let mut label = 0;
        for (i, r) in self.requests.iter().enumerate() {
            for j in 0..r.featurings.len() {
                writeln!(s, "instance _f{i}_{j} : Featuring {{}}").unwrap();
            }
            writeln!(s, "instance req{i} : {} {{", r.class).unwrap();
            for j in 0..r.featurings.len() {
                writeln!(s, "  role subject -> _f{i}_{j};").unwrap();
            }
            writeln!(s, "}}").unwrap();
            for (j, wants) in r.featurings.iter().enumerate() {
                for w in wants {
                    let (class, value, bounds) = match w {
                        Want::Format(f) => ("ROSmsgs", format!("\"{f}\""), Vec::new()),
                        Want::Rate { class, own, bounds } => {
                            (*class, own.map_or("nan".to_string(), |v| v.to_string()), bounds.clone())
                        }
                        Want::Quantity { class, unit, bounds } => (*class, format!("\"{unit}\""), bounds.clone()),
                    };
                    let inner: String = bounds.iter().map(|b| format!(" {}", b.sxdl())).collect();
                    writeln!(s, "instance _w{label} : {class} = {value} {{{inner} role feature -> _f{i}_{j}; }}").unwrap();
                    label += 1;
                }
            }
        }
        s
    }

    fn wants(&self, r: usize) -> impl Iterator<Item = &Want> {
        self.requests[r].featurings.iter().flatten()
    }

    /// Independent statement of when a provider realizes a request.
    pub fn realizes(&self, r: usize, p: usize) -> bool {
        let req = &self.requests[r];
        let prov = &self.providers[p];
        match category(req.class) {
            Category::Data => {
                if category(prov.class) != Category::Data {
                    return false;
                }
                let format_ok = self
                    .wants(r)
                    .any(|w| matches!(w, Want::Format(f) if prov.formats.contains(f)));
                let mut all: Vec<Bound> = Vec::new();
                for w in self.wants(r) {
                    if let Want::Rate { own, bounds, .. } = w {
                        all.extend(own.map(Bound::Exact));
                        all.extend(bounds);
                    }
                }
                let amounts: Vec<f64> = prov.offers.iter().flat_map(Offer::amounts).collect();
                format_ok && (all.is_empty() || amounts.iter().any(|a| all.iter().all(|b| b.holds(*a))))
            }
            cat => {
                category(prov.class) == cat
                    && class_descends(prov.class, req.class)
                    && self.wants(r).all(|w| match w {
                        Want::Quantity { class, unit, bounds } => prov.offers.iter().any(|o| {
                            o.class == *class
                                && o.unit == Some(*unit)
                                && (bounds.is_empty() || o.exacts.iter().any(|a| bounds.iter().all(|b| b.holds(*a))))
                        }),
                        _ => true,
                    })
            }
        }
    }

    pub fn expected_pairs(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for r in 0..self.requests.len() {
            for p in 0..self.providers.len() {
                if self.realizes(r, p) {
                    out.insert((format!("req{r}"), format!("prov{p}")));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Random component DAGs, with composites enumerated as graph paths.

#[derive(Debug, Clone)]
pub struct ComponentDag {
    pub n: usize,
    /// `(from, to)`: the output of `from` feeds an input of `to`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl ComponentDag {
    pub fn random(seed: u64) -> Self {
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=10);
        let density = rng.gen_range(0.1..0.5);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = BTreeSet::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(density) {
                    edges.insert((order[a], order[b]));
                }
            }
        }
        ComponentDag { n, edges }
    }

    pub fn sxdl(&self) -> String {
        let mut s = String::new();
        for c in 0..self.n {
            writeln!(s, "instance c{c} : Functional {{}}").unwrap();
            writeln!(s, "instance out{c} : Information {{ has ROSmsgs = \"fmt{c}\"; }}").unwrap();
        }
        for &(a, b) in &self.edges {
            writeln!(s, "instance _f{a}_{b} : Featuring {{}}").unwrap();
            writeln!(s, "instance in{a}_{b} : Information {{ role subject -> _f{a}_{b}; }}").unwrap();
            writeln!(s, "instance _fmt{a}_{b} : ROSmsgs = \"fmt{a}\" {{ role feature -> _f{a}_{b}; }}").unwrap();
        }
        for c in 0..self.n {
            writeln!(s, "instance fr{c} : FunctionalRequirement {{").unwrap();
            writeln!(s, "  role petitioner -> c{c};").unwrap();
            for &(a, _) in self.edges.iter().filter(|(_, b)| *b == c) {
                writeln!(s, "  role input -> _f{a}_{c};").unwrap();
            }
            writeln!(s, "  role output -> out{c};\n}}").unwrap();
        }
        s
    }

    /// Every path of two or more components, as executor-name sequences.
    pub fn expected_chains(&self) -> BTreeSet<Vec<String>> {
        let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &self.edges {
            succ.entry(a).or_default().push(b);
        }
        let mut out = BTreeSet::new();
        let mut stack: Vec<Vec<usize>> = (0..self.n).map(|c| vec![c]).collect();
        while let Some(path) = stack.pop() {
            if path.len() >= 2 {
                out.insert(path.iter().map(|c| format!("c{c}")).collect());
            }
            for &next in succ.get(path.last().unwrap()).into_iter().flatten() {
                if !path.contains(&next) {
                    let mut p = path.clone();
                    p.push(next);
                    stack.push(p);
                }
            }
        }
        out
    }
}
