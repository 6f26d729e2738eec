//! Seeded synthetic corruption of clean sentences with exact gold edits.
//!
//! Every sentence gets its own ChaCha stream keyed by `(seed, stream_index)`,
//! so corpora are reproducible and can be generated in parallel. Each drawn
//! correction action is realized by its inverse on the clean side: a gold
//! `Add` deletes a clean token, a gold `Split` joins two clean tokens, and so
//! on. Gold edits are recorded as built, never recovered by alignment.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{classify_actions, ActionKind, Edit};
use crate::m2::M2Record;
use crate::text::{is_valid_surface, Sentence, TextConfig, Token};

/// Correction-action shares of the QALB-2014 training split, in percent.
pub const QALB_TRAIN_ACTION_SHARES: [(ActionKind, f64); 7] = [
    (ActionKind::Edit, 55.34),
    (ActionKind::Add, 32.36),
    (ActionKind::Merge, 5.95),
    (ActionKind::Split, 3.48),
    (ActionKind::Delete, 2.21),
    (ActionKind::Move, 0.14),
    (ActionKind::Other, 0.50),
];

pub const DEFAULT_ERROR_RATE: f64 = 0.30;
pub const DEFAULT_SEED: u64 = 2024;
pub const MIN_RECORDS_FOR_VERIFY: usize = 1000;

pub const DEFAULT_FUNCTION_WORDS: &[&str] = &[
    "في", "من", "على", "إلى", "عن", "أن", "لا", "ما", "هذا", "التي", "الذي", "و", "ثم", "قد",
];

/// Letters used by the random character operations. Letters that carry their
/// own orthographic class (alif, ya, waw, hamza forms, ta marbuta, ha, nun)
/// are excluded so a random mutation never imitates a rule-based one.
const RANDOM_LETTERS: &[char] = &[
    'ب', 'ت', 'ث', 'ج', 'ح', 'خ', 'د', 'ذ', 'ر', 'ز', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ', 'ف', 'ق', 'ك',
    'ل', 'م',
];

fn is_random_safe(c: char) -> bool {
    !matches!(
        c,
        'ا' | 'و' | 'ي' | 'ى' | 'ة' | 'ه' | 'ء' | 'أ' | 'إ' | 'آ' | 'ؤ' | 'ئ' | 'ن'
    ) && !('\u{064B}'..='\u{0652}').contains(&c)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    #[default]
    Any,
    Initial,
    Final,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharRule {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "is_any")]
    pub at: Anchor,
}

fn is_any(a: &Anchor) -> bool {
    *a == Anchor::Any
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomOp {
    Replace,
    Insert,
    Delete,
    Swap,
}

/// A weighted family of character mutations labelled with an error code.
/// Holds either substitution rules or one random operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionTable {
    pub code: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<CharRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<RandomOp>,
}

fn unit_weight() -> f64 {
    1.0
}

impl ConfusionTable {
    fn rules(code: &str, rules: &[(&str, &str, Anchor)]) -> Self {
        Self {
            code: code.to_string(),
            weight: 1.0,
            rules: rules
                .iter()
                .map(|&(from, to, at)| CharRule {
                    from: from.to_string(),
                    to: to.to_string(),
                    at,
                })
                .collect(),
            op: None,
        }
    }

    fn random(code: &str, op: RandomOp) -> Self {
        Self {
            code: code.to_string(),
            weight: 1.0,
            rules: Vec::new(),
            op: Some(op),
        }
    }
}

/// Orthographic and punctuation tables, uniformly weighted.
pub fn default_confusion_tables() -> Vec<ConfusionTable> {
    use Anchor::{Any, Final, Initial};
    vec![
        ConfusionTable::rules(
            "OH",
            &[
                ("أ", "ا", Any),
                ("إ", "ا", Any),
                ("آ", "ا", Any),
                ("ا", "أ", Initial),
                ("ا", "إ", Initial),
                ("أ", "إ", Any),
                ("إ", "أ", Any),
                ("ؤ", "و", Any),
                ("ئ", "ي", Any),
            ],
        ),
        ConfusionTable::rules("OT", &[("ة", "ه", Final), ("ه", "ة", Final)]),
        ConfusionTable::rules("OA", &[("ى", "ي", Final), ("ي", "ى", Final), ("ى", "ا", Final)]),
        ConfusionTable::rules("OW", &[("وا", "و", Final), ("و", "وا", Final)]),
        ConfusionTable::rules(
            "ON",
            &[("\u{064B}", "ن", Final), ("\u{064C}", "ن", Final), ("\u{064D}", "ن", Final)],
        ),
        ConfusionTable::random("OC", RandomOp::Swap),
        ConfusionTable::random("OR", RandomOp::Replace),
        ConfusionTable::random("OD", RandomOp::Insert),
        ConfusionTable::random("OM", RandomOp::Delete),
        ConfusionTable::rules(
            "PC",
            &[
                ("،", ",", Any),
                (",", "،", Any),
                ("؛", "،", Any),
                (".", "،", Any),
                ("؟", "?", Any),
                ("?", "؟", Any),
                ("!", ".", Any),
                ("،", ".", Any),
            ],
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_rate")]
    pub target_error_rate: f64,
    /// Inclusive token-count window; sentences outside it are skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_window: Option<(usize, usize)>,
    /// Normalized to sum to 1 by [`CorruptionConfig::from_toml_str`].
    #[serde(default = "default_weights")]
    pub action_weights: BTreeMap<String, f64>,
    #[serde(default = "default_function_words")]
    pub function_words: Vec<String>,
    #[serde(default = "default_confusion_tables", rename = "confusion")]
    pub confusion_tables: Vec<ConfusionTable>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_rate() -> f64 {
    DEFAULT_ERROR_RATE
}

fn default_weights() -> BTreeMap<String, f64> {
    let total: f64 = QALB_TRAIN_ACTION_SHARES.iter().map(|(_, w)| w).sum();
    QALB_TRAIN_ACTION_SHARES
        .iter()
        .map(|&(k, w)| (k.name().to_string(), w / total))
        .collect()
}

fn default_function_words() -> Vec<String> {
    DEFAULT_FUNCTION_WORDS.iter().map(|s| s.to_string()).collect()
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            target_error_rate: DEFAULT_ERROR_RATE,
            length_window: None,
            action_weights: default_weights(),
            function_words: default_function_words(),
            confusion_tables: default_confusion_tables(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorruptError {
    #[error("sentence {stream_index} is empty")]
    EmptySentence { stream_index: u64 },
    #[error("invalid corruption config: {0}")]
    InvalidConfig(String),
    #[error("cannot parse corruption config: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("need at least {required} records to verify a distribution, got {found}")]
    TooFewRecords { found: usize, required: usize },
}

fn invalid(msg: impl Into<String>) -> CorruptError {
    CorruptError::InvalidConfig(msg.into())
}

impl CorruptionConfig {
    /// Parses a TOML config, normalizes action weights and validates.
    pub fn from_toml_str(s: &str) -> Result<Self, CorruptError> {
        let mut cfg: Self = toml::from_str(s)?;
        cfg.normalize_weights()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Config putting all weight on a single action.
    pub fn single_action(kind: ActionKind) -> Self {
        Self {
            action_weights: BTreeMap::from([(kind.name().to_string(), 1.0)]),
            ..Self::default()
        }
    }

    pub fn with_weights(mut self, weights: &[(ActionKind, f64)]) -> Result<Self, CorruptError> {
        self.action_weights = weights.iter().map(|&(k, w)| (k.name().to_string(), w)).collect();
        self.normalize_weights()?;
        self.validate()?;
        Ok(self)
    }

    pub(crate) fn normalize_weights(&mut self) -> Result<(), CorruptError> {
        let total: f64 = self.action_weights.values().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(invalid("action weights must have a positive finite sum"));
        }
        for w in self.action_weights.values_mut() {
            *w /= total;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CorruptError> {
        for (name, &w) in &self.action_weights {
            if ActionKind::parse(name).is_none() {
                return Err(invalid(format!("unknown action {name:?}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(format!("weight of {name} must be nonnegative")));
            }
        }
        let total: f64 = self.action_weights.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("action weights sum to {total}, not 1")));
        }
        if !(self.target_error_rate > 0.0 && self.target_error_rate < 1.0) {
            return Err(invalid("target_error_rate must lie in (0, 1)"));
        }
        if let Some((lo, hi)) = self.length_window {
            if lo > hi {
                return Err(invalid("length_window minimum exceeds maximum"));
            }
        }
        if self.function_words.iter().any(|w| !is_valid_surface(w)) {
            return Err(invalid("function words must be single tokens"));
        }
        for t in &self.confusion_tables {
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                return Err(invalid(format!("table {} has a bad weight", t.code)));
            }
            if t.rules.is_empty() == t.op.is_none() {
                return Err(invalid(format!("table {} needs either rules or op", t.code)));
            }
            if t.rules.iter().any(|r| r.from.is_empty() || r.from == r.to) {
                return Err(invalid(format!("table {} has a vacuous rule", t.code)));
            }
        }
        Ok(())
    }

    /// Weight of `kind`, zero when absent.
    pub fn weight(&self, kind: ActionKind) -> f64 {
        self.action_weights
            .iter()
            .find(|(name, _)| ActionKind::parse(name) == Some(kind))
            .map_or(0.0, |(_, &w)| w)
    }

    fn in_window(&self, len: usize) -> bool {
        self.length_window.is_none_or(|(lo, hi)| (lo..=hi).contains(&len))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionRecord {
    pub stream_index: u64,
    pub clean: Sentence,
    pub noisy: Sentence,
    /// Edits on `noisy` that restore `clean`, classes set.
    pub gold_edits: Vec<Edit>,
    /// Action realized by each gold edit, in edit order.
    pub injected_actions: Vec<ActionKind>,
    /// Drawn actions that found no free site.
    pub dropped_actions: Vec<ActionKind>,
}

impl CorruptionRecord {
    pub fn to_m2(&self) -> M2Record {
        M2Record {
            source: self.noisy.clone(),
            annotations: BTreeMap::from([(0, self.gold_edits.clone())]),
        }
    }
}

// Actions with the fewest candidate sites are placed first.
fn placement_rank(kind: ActionKind) -> u8 {
    match kind {
        ActionKind::Move => 0,
        ActionKind::Split => 1,
        ActionKind::Other => 2,
        ActionKind::Merge => 3,
        ActionKind::Edit => 4,
        ActionKind::Add => 5,
        ActionKind::Delete => 6,
    }
}

#[derive(Clone, Debug)]
enum Slot {
    Keep,
    Add,
    Edit { noisy: String, code: String },
    /// Token split at a char boundary into two noisy tokens.
    SplitAt(usize),
    /// Pair heads: the next token is consumed too.
    JoinNext,
    SwapNext,
    OtherNext(String),
    Consumed,
}

impl Slot {
    fn is_pair_head(&self) -> bool {
        matches!(self, Slot::JoinNext | Slot::SwapNext | Slot::OtherNext(_))
    }
}

#[derive(Clone, Copy, Debug)]
enum Site {
    Rule { rule: usize, pos: usize },
    Pos(usize),
}

struct Planner<'a> {
    cfg: &'a CorruptionConfig,
    text: TextConfig,
    tokens: &'a [Token],
    slots: Vec<Slot>,
    inserted: Vec<Option<Token>>,
}

impl<'a> Planner<'a> {
    fn new(cfg: &'a CorruptionConfig, clean: &'a Sentence) -> Self {
        Self {
            cfg,
            text: TextConfig::default(),
            tokens: &clean.tokens,
            slots: vec![Slot::Keep; clean.len()],
            inserted: vec![None; clean.len() + 1],
        }
    }

    fn free(&self, i: usize) -> bool {
        matches!(self.slots.get(i), Some(Slot::Keep))
    }

    fn word(&self, i: usize) -> bool {
        self.tokens.get(i).is_some_and(|t| !t.is_punct())
    }

    fn pair_site(&self, i: usize) -> bool {
        self.free(i) && self.free(i + 1) && self.word(i) && self.word(i + 1) && self.inserted[i + 1].is_none()
    }

    fn place(&mut self, kind: ActionKind, rng: &mut ChaCha8Rng) -> bool {
        let n = self.tokens.len();
        let candidates: Vec<usize> = match kind {
            ActionKind::Move => (0..n.saturating_sub(1))
                .filter(|&i| self.pair_site(i) && self.tokens[i].surface() != self.tokens[i + 1].surface())
                .collect(),
            ActionKind::Split | ActionKind::Other => {
                (0..n.saturating_sub(1)).filter(|&i| self.pair_site(i)).collect()
            }
            ActionKind::Merge => (0..n)
                .filter(|&i| self.free(i) && self.word(i) && self.tokens[i].surface().chars().count() >= 2)
                .collect(),
            ActionKind::Edit => (0..n)
                .filter(|&i| self.free(i) && self.applicable_tables(i).next().is_some())
                .collect(),
            ActionKind::Add => {
                let adds = self.slots.iter().filter(|s| matches!(s, Slot::Add)).count();
                if adds + 1 >= n {
                    Vec::new()
                } else {
                    (0..n)
                        .filter(|&i| {
                            self.free(i)
                                && !(i > 0 && matches!(self.slots[i - 1], Slot::Add))
                                && !matches!(self.slots.get(i + 1), Some(Slot::Add))
                        })
                        .collect()
                }
            }
            ActionKind::Delete => (0..=n)
                .filter(|&g| self.inserted[g].is_none() && !(g > 0 && self.slots[g - 1].is_pair_head()))
                .collect(),
        };
        let Some(&i) = candidates.choose(rng) else {
            return false;
        };
        match kind {
            ActionKind::Move => self.set_pair(i, Slot::SwapNext),
            ActionKind::Split => self.set_pair(i, Slot::JoinNext),
            ActionKind::Other => {
                let joined = format!("{}{}", self.tokens[i].surface(), self.tokens[i + 1].surface());
                let op = *[RandomOp::Replace, RandomOp::Insert, RandomOp::Delete]
                    .choose(rng)
                    .expect("non-empty");
                let chars: Vec<char> = joined.chars().collect();
                let sites = random_sites(op, &chars);
                let noisy = match sites.choose(rng) {
                    Some(&pos) => apply_random(op, &chars, pos, rng),
                    None => apply_random(RandomOp::Insert, &chars, 0, rng),
                };
                self.set_pair(i, Slot::OtherNext(noisy));
            }
            ActionKind::Merge => {
                let len = self.tokens[i].surface().chars().count();
                self.slots[i] = Slot::SplitAt(rng.random_range(1..len));
            }
            ActionKind::Edit => {
                let tables: Vec<(usize, Vec<Site>)> = self
                    .applicable_tables(i)
                    .collect();
                let weights: Vec<f64> = tables
                    .iter()
                    .map(|(t, _)| self.cfg.confusion_tables[*t].weight)
                    .collect();
                // all-zero weights among applicable tables fall back to uniform
                let pick = WeightedIndex::new(&weights)
                    .map(|d| d.sample(rng))
                    .unwrap_or_else(|_| rng.random_range(0..tables.len()));
                let (t, sites) = &tables[pick];
                let table = &self.cfg.confusion_tables[*t];
                let site = *sites.choose(rng).expect("applicable table has sites");
                let noisy = apply_site(table, self.tokens[i].surface(), site, rng);
                self.slots[i] = Slot::Edit {
                    noisy,
                    code: table.code.clone(),
                };
            }
            ActionKind::Add => self.slots[i] = Slot::Add,
            ActionKind::Delete => {
                let removed: BTreeSet<&str> = self
                    .slots
                    .iter()
                    .zip(self.tokens)
                    .filter(|(s, _)| matches!(s, Slot::Add))
                    .map(|(_, t)| t.surface())
                    .collect();
                // re-inserting a token an Add removed would read as a Move
                let vocab: BTreeSet<&str> = self
                    .tokens
                    .iter()
                    .map(Token::surface)
                    .chain(self.cfg.function_words.iter().map(String::as_str))
                    .filter(|s| !removed.contains(s))
                    .collect();
                let vocab: Vec<&str> = vocab.into_iter().collect();
                let Some(&pick) = vocab.choose(rng) else {
                    return false;
                };
                self.inserted[i] = Some(self.text.token(pick));
            }
        }
        true
    }

    fn set_pair(&mut self, i: usize, head: Slot) {
        self.slots[i] = head;
        self.slots[i + 1] = Slot::Consumed;
    }

    fn applicable_tables(&self, i: usize) -> impl Iterator<Item = (usize, Vec<Site>)> + '_ {
        let token = &self.tokens[i];
        self.cfg
            .confusion_tables
            .iter()
            .enumerate()
            .map(move |(t, table)| (t, table_sites(&self.text, table, token)))
            .filter(|(_, sites)| !sites.is_empty())
    }

    fn build(self) -> (Sentence, Vec<Edit>, Vec<ActionKind>) {
        let cfg = &self.text;
        let mut noisy: Vec<Token> = Vec::new();
        let mut edits = Vec::new();
        let mut kinds = Vec::new();
        let mut record = |edit: Edit, kind: ActionKind, class: &str| {
            edits.push(edit.with_class(class));
            kinds.push(kind);
        };
        let n = self.tokens.len();
        for i in 0..=n {
            if let Some(tok) = &self.inserted[i] {
                let p = noisy.len();
                let class = if tok.is_punct() { "PT" } else { "UNK" };
                record(Edit::new(p, p + 1, vec![]), ActionKind::Delete, class);
                noisy.push(tok.clone());
            }
            if i == n {
                break;
            }
            let p = noisy.len();
            let clean = &self.tokens[i];
            match &self.slots[i] {
                Slot::Keep => noisy.push(clean.clone()),
                Slot::Consumed => {}
                Slot::Add => {
                    let class = if clean.is_punct() { "PM" } else { "UNK" };
                    record(Edit::new(p, p, vec![clean.clone()]), ActionKind::Add, class);
                }
                Slot::Edit { noisy: s, code } => {
                    record(Edit::new(p, p + 1, vec![clean.clone()]), ActionKind::Edit, code);
                    noisy.push(cfg.token(s.as_str()));
                }
                Slot::SplitAt(at) => {
                    let s = clean.surface();
                    let byte = s.char_indices().nth(*at).map(|(b, _)| b).expect("split inside token");
                    record(Edit::new(p, p + 2, vec![clean.clone()]), ActionKind::Merge, "SP");
                    noisy.push(cfg.token(&s[..byte]));
                    noisy.push(cfg.token(&s[byte..]));
                }
                Slot::JoinNext => {
                    let next = &self.tokens[i + 1];
                    record(
                        Edit::new(p, p + 1, vec![clean.clone(), next.clone()]),
                        ActionKind::Split,
                        "MG",
                    );
                    noisy.push(cfg.token(format!("{}{}", clean.surface(), next.surface())));
                }
                Slot::SwapNext => {
                    let next = &self.tokens[i + 1];
                    record(
                        Edit::new(p, p + 2, vec![clean.clone(), next.clone()]),
                        ActionKind::Move,
                        "UNK",
                    );
                    noisy.push(next.clone());
                    noisy.push(clean.clone());
                }
                Slot::OtherNext(s) => {
                    let next = &self.tokens[i + 1];
                    record(
                        Edit::new(p, p + 1, vec![clean.clone(), next.clone()]),
                        ActionKind::Other,
                        "UNK",
                    );
                    noisy.push(cfg.token(s.as_str()));
                }
            }
        }
        (Sentence::new("", noisy), edits, kinds)
    }
}

fn table_sites(text: &TextConfig, table: &ConfusionTable, token: &Token) -> Vec<Site> {
    let s = token.surface();
    if let Some(op) = table.op {
        if token.is_punct() {
            return Vec::new();
        }
        let chars: Vec<char> = s.chars().collect();
        return random_sites(op, &chars).into_iter().map(Site::Pos).collect();
    }
    let mut sites = Vec::new();
    for (r, rule) in table.rules.iter().enumerate() {
        for (pos, _) in s.match_indices(rule.from.as_str()) {
            let end = pos + rule.from.len();
            let anchored = match rule.at {
                Anchor::Any => true,
                Anchor::Initial => pos == 0,
                Anchor::Final => end == s.len(),
            };
            let out = format!("{}{}{}", &s[..pos], rule.to, &s[end..]);
            // the mutation must stay one token of the same kind
            if anchored && is_valid_surface(&out) && text.token(out.as_str()).kind() == token.kind() {
                sites.push(Site::Rule { rule: r, pos });
            }
        }
    }
    sites
}

fn random_sites(op: RandomOp, chars: &[char]) -> Vec<usize> {
    let safe = |i: usize| is_random_safe(chars[i]);
    match op {
        RandomOp::Replace => (0..chars.len()).filter(|&i| safe(i)).collect(),
        RandomOp::Insert => (0..=chars.len()).collect(),
        RandomOp::Delete if chars.len() >= 2 => (0..chars.len()).filter(|&i| safe(i)).collect(),
        RandomOp::Delete => Vec::new(),
        RandomOp::Swap => (0..chars.len().saturating_sub(1))
            .filter(|&i| safe(i) && safe(i + 1) && chars[i] != chars[i + 1])
            .collect(),
    }
}

fn apply_random(op: RandomOp, chars: &[char], pos: usize, rng: &mut ChaCha8Rng) -> String {
    let mut out = chars.to_vec();
    match op {
        RandomOp::Replace => {
            let old = out[pos];
            let choices: Vec<char> = RANDOM_LETTERS.iter().copied().filter(|&c| c != old).collect();
            out[pos] = *choices.choose(rng).expect("alphabet has alternatives");
        }
        RandomOp::Insert => out.insert(pos, *RANDOM_LETTERS.choose(rng).expect("non-empty")),
        RandomOp::Delete => {
            out.remove(pos);
        }
        RandomOp::Swap => out.swap(pos, pos + 1),
    }
    out.into_iter().collect()
}

fn apply_site(table: &ConfusionTable, s: &str, site: Site, rng: &mut ChaCha8Rng) -> String {
    match site {
        Site::Rule { rule, pos } => {
            let r = &table.rules[rule];
            format!("{}{}{}", &s[..pos], r.to, &s[pos + r.from.len()..])
        }
        Site::Pos(pos) => {
            let chars: Vec<char> = s.chars().collect();
            apply_random(table.op.expect("random table"), &chars, pos, rng)
        }
    }
}

fn stream_rng(seed: u64, stream_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    rng
}

/// Corrupts one clean sentence. Deterministic in `(cfg, stream_index, clean)`.
pub fn corrupt_sentence(
    clean: &Sentence,
    cfg: &CorruptionConfig,
    stream_index: u64,
) -> Result<CorruptionRecord, CorruptError> {
    if clean.is_empty() {
        return Err(CorruptError::EmptySentence { stream_index });
    }
    let mut rng = stream_rng(cfg.seed, stream_index);
    let binomial = Binomial::new(clean.len() as u64, cfg.target_error_rate)
        .map_err(|e| invalid(e.to_string()))?;
    let k = binomial.sample(&mut rng) as usize;
    corrupt_with_count(clean, cfg, stream_index, k, &mut rng)
}

/// Like [`corrupt_sentence`] with the action count fixed to `k`.
pub fn corrupt_sentence_with_count(
    clean: &Sentence,
    cfg: &CorruptionConfig,
    stream_index: u64,
    k: usize,
) -> Result<CorruptionRecord, CorruptError> {
    if clean.is_empty() {
        return Err(CorruptError::EmptySentence { stream_index });
    }
    let mut rng = stream_rng(cfg.seed, stream_index);
    corrupt_with_count(clean, cfg, stream_index, k, &mut rng)
}

fn corrupt_with_count(
    clean: &Sentence,
    cfg: &CorruptionConfig,
    stream_index: u64,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CorruptionRecord, CorruptError> {
    let weights: Vec<f64> = ActionKind::ALL.iter().map(|&a| cfg.weight(a)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| invalid(e.to_string()))?;
    let mut actions: Vec<ActionKind> = (0..k).map(|_| ActionKind::ALL[dist.sample(rng)]).collect();
    actions.sort_by_key(|&a| placement_rank(a));

    let mut planner = Planner::new(cfg, clean);
    let mut dropped = Vec::new();
    for action in actions {
        if !planner.place(action, rng) {
            dropped.push(action);
        }
    }
    if !dropped.is_empty() {
        log::warn!(
            "sentence {stream_index}: no free site for {} action(s) {:?}; dropped",
            dropped.len(),
            dropped
        );
    }
    let (noisy, gold_edits, injected_actions) = planner.build();
    Ok(CorruptionRecord {
        stream_index,
        clean: clean.clone(),
        noisy: noisy.with_id(clean.id.clone()),
        gold_edits,
        injected_actions,
        dropped_actions: dropped,
    })
}

/// Streams records for sentences inside the length window. The stream index
/// of each sentence is its ordinal in the input, counting skipped ones.
pub fn corrupt_corpus<'a, I>(
    clean: I,
    cfg: &'a CorruptionConfig,
) -> impl Iterator<Item = Result<CorruptionRecord, CorruptError>> + 'a
where
    I: IntoIterator<Item = Sentence>,
    I::IntoIter: 'a,
{
    clean
        .into_iter()
        .enumerate()
        .filter(|(_, s)| cfg.in_window(s.len()))
        .map(|(i, s)| corrupt_sentence(&s, cfg, i as u64))
}

/// Parallel [`corrupt_corpus`] over a slice; output order follows input order.
pub fn corrupt_corpus_par(clean: &[Sentence], cfg: &CorruptionConfig) -> Result<Vec<CorruptionRecord>, CorruptError> {
    let out: Result<Vec<Option<CorruptionRecord>>, CorruptError> = clean
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if cfg.in_window(s.len()) {
                corrupt_sentence(s, cfg, i as u64).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Absolute percentage points per action share.
    pub action_points: f64,
    /// Absolute percentage points on the error rate.
    pub error_rate_points: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            action_points: 1.5,
            error_rate_points: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionShare {
    pub action: ActionKind,
    pub count: usize,
    pub target_pct: f64,
    pub empirical_pct: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub records: usize,
    pub gold_edits: usize,
    pub clean_tokens: usize,
    pub dropped_actions: usize,
    pub shares: Vec<ActionShare>,
    /// Gold edits per clean token, in percent.
    pub error_rate_pct: f64,
    pub target_error_rate_pct: f64,
    pub error_rate_pass: bool,
    pub tolerances: Tolerances,
    pub pass: bool,
}

impl ConformanceReport {
    pub fn render(&self) -> String {
        let mut out = format!(
            "records {}  gold edits {}  clean tokens {}  dropped {}\n",
            self.records, self.gold_edits, self.clean_tokens, self.dropped_actions
        );
        out.push_str("Action    Target%  Empirical%  Pass\n");
        for s in &self.shares {
            out.push_str(&format!(
                "{:<8}{:>9.2}{:>12.2}  {}\n",
                s.action.name(),
                s.target_pct,
                s.empirical_pct,
                if s.pass { "ok" } else { "FAIL" }
            ));
        }
        out.push_str(&format!(
            "Err.%   {:>9.2}{:>12.2}  {}\n",
            self.target_error_rate_pct,
            self.error_rate_pct,
            if self.error_rate_pass { "ok" } else { "FAIL" }
        ));
        out
    }
}

/// Compares empirical action shares and error rate against `cfg`. Shares
/// come from [`classify_actions`] over the gold edits, not from the labels
/// the generator recorded.
pub fn verify_distribution<'a>(
    records: impl IntoIterator<Item = &'a CorruptionRecord>,
    cfg: &CorruptionConfig,
    tol: Tolerances,
) -> Result<ConformanceReport, CorruptError> {
    let mut counts = [0usize; 7];
    let (mut n_records, mut edits, mut tokens, mut dropped) = (0, 0, 0, 0);
    for r in records {
        n_records += 1;
        tokens += r.clean.len();
        edits += r.gold_edits.len();
        dropped += r.dropped_actions.len();
        for kind in classify_actions(&r.gold_edits, &r.noisy) {
            counts[kind.index()] += 1;
        }
    }
    if n_records < MIN_RECORDS_FOR_VERIFY {
        return Err(CorruptError::TooFewRecords {
            found: n_records,
            required: MIN_RECORDS_FOR_VERIFY,
        });
    }
    let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };
    let shares: Vec<ActionShare> = ActionKind::ALL
        .iter()
        .map(|&action| {
            let target_pct = 100.0 * cfg.weight(action);
            let empirical_pct = pct(counts[action.index()], edits);
            ActionShare {
                action,
                count: counts[action.index()],
                target_pct,
                empirical_pct,
                pass: (empirical_pct - target_pct).abs() <= tol.action_points,
            }
        })
        .collect();
    let error_rate_pct = pct(edits, tokens);
    let target_error_rate_pct = 100.0 * cfg.target_error_rate;
    let error_rate_pass = (error_rate_pct - target_error_rate_pct).abs() <= tol.error_rate_points;
    let pass = error_rate_pass && shares.iter().all(|s| s.pass);
    Ok(ConformanceReport {
        records: n_records,
        gold_edits: edits,
        clean_tokens: tokens,
        dropped_actions: dropped,
        shares,
        error_rate_pct,
        target_error_rate_pct,
        error_rate_pass,
        tolerances: tol,
        pass,
    })
}
