//! The verification pipeline: run configuration, the individual steps, and
//! the assembled report with its final monodromy verdict.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{self, CacheError, CacheStatus};
use crate::certificate::{soundness, Certificate, Verdict};
use crate::exactring::{gen_primes, int, is_admissible_prime, ArithError};
use crate::g31::{
    saito_constant, ArrangementData, Letter, StepTimings, ARRANGEMENT_DEGREE, BASIS_DEGREES,
    PRIMED_DEGREES, SAITO_CONSTANT,
};
use crate::gradlin::{min_syzygy_scan, regular_sequence_certificate};
use crate::koszul::{
    ar_dim_certificate, build_minor_table, closedness_certificate, general_wedge_kernel,
    monodromy_report, pair_name, param_dim, param_family_certificate, param_rank_certificate,
    syzygy_triples, wedge_dimension_certificate, Closedness, MinorTable,
    MonodromyCase, MonodromyConclusion, SyzygyTriple, CASE_PAIRS,
};
use crate::poly::Polynomial;

pub const REPORT_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "arrmono";
pub const CHECK_DEGREES: [u32; 5] = [10, 20, 30, 40, 50];
pub const SCAN_MAX_DEGREE: u32 = 48;
pub const DEFAULT_PRIME_COUNT: usize = 2;
pub const DEFAULT_PRIME_BITS: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PrimeSpec {
    Explicit { primes: Vec<u64> },
    Generated { count: usize, bits: u32, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    /// `None` keeps everything in memory.
    pub cache_dir: Option<PathBuf>,
    pub primes: PrimeSpec,
    pub seed: u64,
    /// `None` lets the pool pick.
    pub threads: Option<usize>,
    pub heavy_oracles: bool,
    pub output_format: OutputFormat,
    pub regseq_retries: usize,
    pub family_samples: usize,
    pub lift_primes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cache_dir: None,
            primes: PrimeSpec::Generated {
                count: DEFAULT_PRIME_COUNT,
                bits: DEFAULT_PRIME_BITS,
                seed: 0,
            },
            seed: 0,
            threads: None,
            heavy_oracles: false,
            output_format: OutputFormat::Text,
            regseq_retries: 5,
            family_samples: 5,
            lift_primes: 24,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("prime {0} rejected: it must be an odd prime below 2^62 not dividing any pipeline constant (486, 265531392, 1620, 5, 60)")]
    BadPrime(u64),
    #[error("prime {0} listed twice")]
    DuplicatePrime(u64),
    #[error("at least one prime is required")]
    NoPrimes,
    #[error("thread count must be positive")]
    Threads,
    #[error("no check is defined for k = {0}; choose one of 10, 20, 30, 40, 50")]
    UnsupportedDegree(u32),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl RunConfig {
    /// The primes to use, after the soundness guard.
    pub fn resolve_primes(&self) -> Result<Vec<u64>, ConfigError> {
        if self.threads == Some(0) {
            return Err(ConfigError::Threads);
        }
        let primes = match &self.primes {
            PrimeSpec::Explicit { primes } => {
                for (i, &p) in primes.iter().enumerate() {
                    if !is_admissible_prime(p) {
                        return Err(ConfigError::BadPrime(p));
                    }
                    if primes[..i].contains(&p) {
                        return Err(ConfigError::DuplicatePrime(p));
                    }
                }
                primes.clone()
            }
            PrimeSpec::Generated { count, bits, seed } => gen_primes(*count, *bits, *seed)?,
        };
        if primes.is_empty() {
            return Err(ConfigError::NoPrimes);
        }
        Ok(primes)
    }

    pub fn lift_prime_list(&self) -> Vec<u64> {
        gen_primes(self.lift_primes.max(1), 62, self.seed ^ 0x6c69_6674).expect("62-bit primes")
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Build(#[from] crate::g31::BuildError),
}

/// A named group of certificates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub certificates: Vec<Certificate>,
}

impl Section {
    fn new(name: &str, certificates: Vec<Certificate>) -> Self {
        Self {
            name: name.into(),
            certificates,
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.certificates.iter())
    }
}

/// Loaded arrangement data plus the derived objects shared by several steps.
pub struct Pipeline {
    pub config: RunConfig,
    pub primes: Vec<u64>,
    pub data: ArrangementData,
    pub cache_status: Option<CacheStatus>,
    pub build_timings: StepTimings,
    minors: OnceLock<(MinorTable, Vec<Certificate>)>,
    triples: OnceLock<[SyzygyTriple; 4]>,
}

fn ids(certs: &[Certificate]) -> Vec<(String, Verdict)> {
    certs.iter().map(|c| (c.id.clone(), c.verdict)).collect()
}

fn exact_check(id: &str, claim: &str, ok: bool, start: Instant) -> Certificate {
    Certificate::new(id, claim, if ok { Verdict::Proved } else { Verdict::Refuted })
        .with_soundness(soundness::EXACT)
        .timed(start)
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self, PipelineError> {
        let primes = config.resolve_primes()?;
        let (data, cache_status, build_timings) = match &config.cache_dir {
            Some(dir) => {
                let (d, s, t) = cache::load_or_build(dir)?;
                (d, Some(s), t)
            }
            None => {
                let (d, t) = ArrangementData::build()?;
                (d, None, t)
            }
        };
        Ok(Self::from_data(config, primes, data, cache_status, build_timings))
    }

    pub fn from_data(
        config: RunConfig,
        primes: Vec<u64>,
        data: ArrangementData,
        cache_status: Option<CacheStatus>,
        build_timings: StepTimings,
    ) -> Self {
        Self {
            config,
            primes,
            data,
            cache_status,
            build_timings,
            minors: OnceLock::new(),
            triples: OnceLock::new(),
        }
    }

    fn in_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match self.config.threads {
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }

    fn minor_table(&self) -> &(MinorTable, Vec<Certificate>) {
        self.minors.get_or_init(|| build_minor_table(&self.data.primed))
    }

    fn triples(&self) -> &[SyzygyTriple; 4] {
        self.triples
            .get_or_init(|| syzygy_triples(&self.data.primed, &self.data.basis))
    }

    /// Exact construction identities on the (possibly cached) data.
    pub fn construction(&self) -> Vec<Certificate> {
        let d = &self.data;
        let inv = &d.invariants;
        let grad = d.gradient();
        let mut out = Vec::new();

        let t = Instant::now();
        out.push(
            exact_check(
                "construction.f",
                "f has degree 60 and is the product of the arrangement factors",
                d.f.is_homogeneous_of_degree(ARRANGEMENT_DEGREE) && d.f == crate::g31::build_f(),
                t,
            )
            .with_value("terms", d.f.len())
            .with_value("max_coeff_bits", d.f.max_coeff_bits()),
        );

        let t = Instant::now();
        out.push(exact_check(
            "construction.s4",
            "s_4 = 9 F_8^2",
            inv.s[4] == inv.f8.pow(2).scale(&int(9)),
            t,
        ));

        let t = Instant::now();
        let euler: Vec<Polynomial> = (0..4).map(Polynomial::var).collect();
        let ef = crate::g31::apply_to_gradient(&euler, &grad);
        out.push(exact_check(
            "construction.euler",
            "E[1] = (x, y, z, t) and E[1] f = 60 f",
            d.basis.column(0) == euler && ef == d.f.scale(&int(ARRANGEMENT_DEGREE as i64)),
            t,
        ));

        let t = Instant::now();
        let syz = (1..4).all(|j| crate::g31::apply_to_gradient(&d.basis.column(j), &grad).is_zero());
        out.push(exact_check(
            "construction.syzygies",
            "E[j] annihilates grad f for j = 2, 3, 4",
            syz,
            t,
        ));

        let t = Instant::now();
        let c = saito_constant(&d.basis, &d.f).ok();
        out.push(
            exact_check(
                "construction.saito",
                "det E = -486 f",
                c == Some(int(SAITO_CONSTANT)),
                t,
            )
            .with_value("constant", c.map(|c| c.to_string())),
        );

        let t = Instant::now();
        let degs: Vec<Option<u32>> = (0..4)
            .map(|j| crate::g31::column_degree(&d.basis.column(j)))
            .collect();
        out.push(
            exact_check(
                "construction.exponents",
                "the columns of E have degrees (1, 29, 13, 17)",
                degs == BASIS_DEGREES.map(Some),
                t,
            )
            .with_value("column_degrees", degs),
        );
        out
    }

    /// Degrees, term counts and exact division of the primed columns.
    pub fn primed(&self) -> Vec<Certificate> {
        let t = Instant::now();
        let pc = &self.data.primed;
        let e = &self.data.basis.e;
        let mut exact = true;
        for (l, i, p) in pc.all() {
            let r = l.coordinate();
            exact &= &Polynomial::var(r) * p == *e.get(r, i + 1);
        }
        let degs: Vec<Option<u32>> = pc.m.iter().map(|p| p.degree()).collect();
        let terms: Vec<usize> = pc.m.iter().map(|p| p.len()).collect();
        let bits = pc.all().map(|(_, _, p)| p.max_coeff_bits()).max().unwrap_or(0);
        let all_degs = Letter::ALL.iter().all(|&l| {
            pc.letter(l)
                .iter()
                .zip(PRIMED_DEGREES)
                .all(|(p, d)| p.is_homogeneous_of_degree(d))
        });
        vec![
            exact_check(
                "primed.division",
                "E[r][j] = x_r l'_j for every row r and column j = 2, 3, 4",
                exact,
                t,
            ),
            exact_check(
                "primed.m_shape",
                "m'_1, m'_2, m'_3 have degrees (28, 12, 16) and (136, 24, 45) terms",
                degs == PRIMED_DEGREES.map(Some) && terms == [136, 24, 45] && all_degs,
                t,
            )
            .with_value("degrees", degs)
            .with_value("terms", terms)
            .with_value("max_coeff_bits_all_letters", bits),
        ]
    }

    pub fn freeness(&self) -> Vec<Certificate> {
        let mut out = self.construction();
        out.extend(self.primed());
        out
    }

    /// `dim AR(f)_D` for `D = 8, 13, 17`, direct kernel against the free basis.
    pub fn graded_consistency(&self) -> Vec<Certificate> {
        [8, 13, 17]
            .iter()
            .map(|&d| ar_dim_certificate(&self.data, d, &self.primes))
            .collect()
    }

    pub fn regular_sequences(&self) -> Vec<Certificate> {
        Letter::ALL
            .iter()
            .map(|&l| {
                let seed = self.config.seed.wrapping_add(l.coordinate() as u64);
                regular_sequence_certificate(
                    &format!("regseq.{}", l.name()),
                    self.data.primed.letter(l),
                    seed,
                    &self.primes,
                    self.config.regseq_retries,
                )
                .with_value("letter", format!("{}'", l.name()))
                .with_claim(format!("({0}'_1, {0}'_2, {0}'_3) is a regular sequence in S", l.name()))
            })
            .collect()
    }

    /// Divisibility of the M-minor families and the syzygy triples.
    pub fn minors(&self) -> Vec<Certificate> {
        let (table, certs) = self.minor_table();
        let grad = self.data.gradient();
        let mut out = certs.clone();
        out.extend(self.triples().iter().map(|t| t.certify(&grad, table)));
        out
    }

    /// Minimal syzygies of `MN'`, `MP'`, `MQ'`.
    pub fn scans(&self) -> Vec<Certificate> {
        let (table, _) = self.minor_table();
        let lift = self.config.lift_prime_list();
        let mut out = Vec::new();
        for partner in [Letter::N, Letter::P, Letter::Q] {
            let name = format!("{}'", pair_name(Letter::M, partner));
            let id = format!("scan.{}", pair_name(Letter::M, partner).to_lowercase());
            match table.reduced(partner) {
                Some(g) => {
                    let s = min_syzygy_scan(&id, g, SCAN_MAX_DEGREE, &self.primes, &lift);
                    let mut below = s.below;
                    below.claim = below.claim.replace(&format!("{id} generators"), &name);
                    out.push(below);
                    match s.at_first {
                        Some(mut c) => {
                            c.claim = c.claim.replace(&format!("{id} generators"), &name);
                            out.push(c);
                        }
                        None => out.push(Certificate::new(
                            format!("{id}.syzygy_at_first"),
                            format!("{name} has a syzygy in total degree {SCAN_MAX_DEGREE}"),
                            Verdict::Inconclusive,
                        )),
                    }
                }
                None => out.push(Certificate::new(
                    format!("{id}.no_syzygy_below"),
                    format!("{name} is defined"),
                    Verdict::Refuted,
                )),
            }
        }
        // the scans certify the multidegree (24, 8, 12) at D = 48
        for c in out.iter_mut().filter(|c| c.id.ends_with("syzygy_at_first")) {
            let md = c.values.get("multidegree").cloned();
            if c.verdict == Verdict::Proved && md != Some(serde_json::json!([24, 8, 12])) {
                c.verdict = Verdict::Refuted;
            }
        }
        out
    }

    /// The certificates of one `k`-case, without the shared prerequisites.
    pub fn check(&self, k: u32) -> Result<Vec<Certificate>, ConfigError> {
        let primes = &self.primes;
        let certs = match k {
            10 => {
                let (_, w) = general_wedge_kernel(10, &self.data.basis, primes);
                vec![ar_dim_certificate(&self.data, 8, primes), w]
            }
            20 | 30 => vec![general_wedge_kernel(k, &self.data.basis, primes).1],
            40 | 50 => {
                let (table, _) = self.minor_table();
                let grad = self.data.gradient();
                let mut rng = ChaCha20Rng::seed_from_u64(self.config.seed ^ k as u64);
                let mut v = vec![
                    param_family_certificate(
                        k,
                        self.triples(),
                        table,
                        &grad,
                        self.config.family_samples,
                        &mut rng,
                    ),
                    param_rank_certificate(k, table, primes),
                    closedness_certificate(k, table, &[Closedness::E4], primes),
                ];
                if k == 40 {
                    v.push(wedge_dimension_certificate(40, &self.data.basis, primes, param_dim(40)));
                }
                v
            }
            _ => return Err(ConfigError::UnsupportedDegree(k)),
        };
        Ok(certs)
    }

    /// Certificates `k = 50` relies on besides its own.
    pub fn k50_prerequisites(&self) -> Vec<Certificate> {
        let mut v = self.regular_sequences();
        v.extend(self.minors());
        v.extend(self.scans());
        v
    }

    pub fn heavy_oracle(&self) -> Option<Certificate> {
        self.config
            .heavy_oracles
            .then(|| wedge_dimension_certificate(50, &self.data.basis, &self.primes, param_dim(50)))
    }

    /// Recorded experiments; they never affect the verdict.
    pub fn experiments(&self) -> Vec<Certificate> {
        let (table, _) = self.minor_table();
        let mut out = vec![closedness_certificate(50, table, &Closedness::ALL, &self.primes)];
        for e in [Closedness::E1, Closedness::E2, Closedness::E3] {
            out.push(closedness_certificate(50, table, &[e], &self.primes));
        }
        let t = Instant::now();
        let div = &Polynomial::var(2).pow(4) - &Polynomial::var(3).pow(4);
        let pq: Option<Vec<Polynomial>> = table
            .minors(Letter::P, Letter::Q)
            .iter()
            .map(|m| m.exact_div(&div).ok())
            .collect();
        match pq.and_then(|v| <[Polynomial; 3]>::try_from(v).ok()) {
            Some(g) => {
                let lift = self.config.lift_prime_list();
                let s = min_syzygy_scan("scan.pq", &g, SCAN_MAX_DEGREE, &self.primes, &lift);
                let mut c = Certificate::new(
                    "experiment.scan.pq",
                    "first syzygy of PQ' = PQ/(z^4 - t^4) (recorded, not asserted)",
                    Verdict::Proved,
                )
                .with_value("first_degree", s.first_degree)
                .with_value("multidegree", s.multidegree)
                .with_value("kernel_dims_mod_p", s.kernel_dims.last())
                .with_soundness(soundness::KERNEL_UPPER_BOUND);
                c.verdict = Verdict::all(std::iter::once(&s.below).chain(s.at_first.as_ref()));
                out.push(c.timed(t));
            }
            None => out.push(
                Certificate::new(
                    "experiment.scan.pq",
                    "z^4 - t^4 divides the PQ minors",
                    Verdict::Refuted,
                )
                .timed(t),
            ),
        }
        out
    }

    /// Runs everything and assembles the report.
    pub fn report(&self) -> Report {
        let sections = self.in_pool(|| {
            let ((construction, consistency), (regseq, (minors, scans))) = rayon::join(
                || (self.freeness(), self.graded_consistency()),
                || {
                    (
                        self.regular_sequences(),
                        rayon::join(|| self.minors(), || self.scans()),
                    )
                },
            );
            let checks: Vec<Vec<Certificate>> = {
                use rayon::prelude::*;
                CHECK_DEGREES
                    .par_iter()
                    .map(|&k| self.check(k).expect("supported degree"))
                    .collect()
            };
            let mut s = vec![
                Section::new("construction", construction),
                Section::new("graded_consistency", consistency),
                Section::new("regular_sequences", regseq),
                Section::new("minors", minors),
                Section::new("syzygy_scans", scans),
            ];
            for (k, c) in CHECK_DEGREES.iter().zip(checks) {
                s.push(Section::new(&format!("k{k}"), c));
            }
            s
        });
        let heavy = self.in_pool(|| self.heavy_oracle());
        let experiments = self.in_pool(|| self.experiments());
        Report::assemble(self, sections, heavy, experiments)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Skipped,
    Run,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyOracle {
    pub status: OracleStatus,
    pub certificate: Option<Certificate>,
}

/// Non-deterministic run data, kept apart from the certified content.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub wall_ms: BTreeMap<String, u64>,
    pub build_steps_ms: Vec<(String, u64)>,
    pub cache_status: Option<CacheStatus>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub primes: Vec<u64>,
    pub sections: Vec<Section>,
    pub cases: Vec<MonodromyCase>,
    pub heavy_oracle: HeavyOracle,
    pub experiments: Vec<Certificate>,
    pub conclusion: MonodromyConclusion,
    pub notes: Vec<String>,
    pub timings: Timings,
}

pub const NOTES: [&str; 5] = [
    "For k < 60 the degree-k part of H^2 of the Koszul complex is the kernel of df^ on 2-forms, since df^ applied to 1-forms only reaches coefficient degree >= 59; hence [d omega] = 0 reduces to d omega = 0.",
    "Regular sequences are certified on a random hyperplane slice: the restricted ideal must contain all of degree 54, one more than the socle degree of a complete intersection of degrees 28, 12, 16 in three variables.",
    "k = 10 uses AR(f)_8 = 0; k = 20 and 30 use the relations R1..R4 written in the free basis; k = 40 and 50 use the minor parametrization plus the rank of the closedness equation E4, and k = 40 is also checked against the full kernel dimension.",
    "Uniqueness of A' is certified directly by the full column rank of the parametrization.",
    "b_1(F) = 59 is a consequence recorded with the conclusion, not recomputed.",
];

impl Report {
    fn assemble(
        p: &Pipeline,
        sections: Vec<Section>,
        heavy: Option<Certificate>,
        experiments: Vec<Certificate>,
    ) -> Self {
        let mut r = Report {
            report_version: REPORT_VERSION,
            tool: ToolInfo {
                name: TOOL_NAME.into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            config: p.config.clone(),
            primes: p.primes.clone(),
            sections,
            cases: Vec::new(),
            heavy_oracle: HeavyOracle {
                status: if heavy.is_some() {
                    OracleStatus::Run
                } else {
                    OracleStatus::Skipped
                },
                certificate: heavy,
            },
            experiments,
            conclusion: monodromy_report(&[], &[]),
            notes: NOTES.iter().map(|s| s.to_string()).collect(),
            timings: Timings {
                build_steps_ms: p
                    .build_timings
                    .iter()
                    .map(|(n, t)| (n.clone(), *t as u64))
                    .collect(),
                cache_status: p.cache_status.clone(),
                ..Default::default()
            },
        };
        r.reevaluate();
        r.collect_timings();
        r
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.sections
            .iter()
            .flat_map(|s| s.certificates.iter())
            .chain(self.heavy_oracle.certificate.iter())
    }

    pub fn certificates_mut(&mut self) -> impl Iterator<Item = &mut Certificate> {
        self.sections
            .iter_mut()
            .flat_map(|s| s.certificates.iter_mut())
            .chain(self.heavy_oracle.certificate.iter_mut())
    }

    pub fn certificate(&self, id: &str) -> Option<&Certificate> {
        self.certificates().find(|c| c.id == id)
    }

    /// Recomputes the cases and the conclusion from the certificates.
    pub fn reevaluate(&mut self) {
        let mut e2 = BTreeMap::new();
        let chain: Vec<Certificate> = ["regular_sequences", "minors", "syzygy_scans"]
            .iter()
            .filter_map(|n| self.section(n))
            .flat_map(|s| s.certificates.clone())
            .collect();
        for k in CHECK_DEGREES {
            if let Some(s) = self.section(&format!("k{k}")) {
                let mut certs = ids(&s.certificates);
                if k == 50 {
                    certs.extend(ids(&chain));
                }
                let ok = certs.iter().all(|(_, v)| *v == Verdict::Proved) && !certs.is_empty();
                e2.insert(k, (ok.then_some(0), certs));
            }
        }
        self.cases = CASE_PAIRS
            .iter()
            .map(|&(k, _)| MonodromyCase::evaluate(k, &e2))
            .collect();
        let prerequisites: Vec<Certificate> = ["construction", "graded_consistency"]
            .iter()
            .filter_map(|n| self.section(n))
            .flat_map(|s| s.certificates.clone())
            .chain(self.heavy_oracle.certificate.clone())
            .collect();
        let mut all: Vec<Certificate> = prerequisites;
        for name in ["construction", "graded_consistency"] {
            if self.section(name).is_none() {
                all.push(Certificate::new(
                    format!("{name}.missing"),
                    format!("section {name} present"),
                    Verdict::Inconclusive,
                ));
            }
        }
        self.conclusion = monodromy_report(&self.cases, &all);
    }

    fn collect_timings(&mut self) {
        let mut t = BTreeMap::new();
        for c in self.certificates().chain(self.experiments.iter()) {
            t.insert(c.id.clone(), c.wall_ms);
        }
        self.timings.wall_ms = t;
    }

    /// Verdict over every gating certificate and the conclusion.
    pub fn verdict(&self) -> Verdict {
        self.conclusion.verdict
    }

    /// 0 when proved, 1 when some certificate is refuted, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.verdict(), self.certificates())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its timing block; identical configurations give
    /// identical bytes.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("timings");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let mut r: Report = serde_json::from_str(s)?;
        let t = r.timings.wall_ms.clone();
        for c in r.certificates_mut() {
            c.wall_ms = t.get(&c.id).copied().unwrap_or(0);
        }
        for c in r.experiments.iter_mut() {
            c.wall_ms = t.get(&c.id).copied().unwrap_or(0);
        }
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "{} {} report v{} primes {:?}\n",
            self.tool.name, self.tool.version, self.report_version, self.primes
        ));
        for sec in &self.sections {
            s.push_str(&format!("\n[{}] {}\n", sec.name, sec.verdict()));
            for c in &sec.certificates {
                s.push_str(&certificate_line(c));
            }
        }
        s.push_str("\n[heavy oracle] ");
        match &self.heavy_oracle.certificate {
            Some(c) => {
                s.push('\n');
                s.push_str(&certificate_line(c));
            }
            None => s.push_str("skipped\n"),
        }
        s.push_str("\n[experiments] (recorded, not part of the verdict)\n");
        for c in &self.experiments {
            s.push_str(&certificate_line(c));
        }
        s.push_str("\n[cases]\n");
        for c in &self.cases {
            s.push_str(&format!(
                "  k={:>2} k'={:>2} order {}  E2 dims {:?}  {}\n",
                c.k, c.kprime, c.order, c.e2_dims, c.verdict
            ));
        }
        s.push_str(&format!(
            "\nverdict: {} ({})\n",
            self.conclusion.statement, self.conclusion.verdict
        ));
        s
    }
}

pub fn certificate_line(c: &Certificate) -> String {
    format!("  {:<13} {:<36} {}\n", c.verdict.to_string(), c.id, c.claim)
}

pub fn exit_code<'a>(verdict: Verdict, certs: impl IntoIterator<Item = &'a Certificate>) -> i32 {
    if verdict == Verdict::Proved {
        0
    } else if certs.into_iter().any(|c| c.verdict == Verdict::Refuted) || verdict == Verdict::Refuted {
        1
    } else {
        2
    }
}
