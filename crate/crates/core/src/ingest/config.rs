use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{content_lines, read_to_string};

/// Hyperparameters of the consistency classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    pub hidden_width: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Training stops once the loss improved by less than
    /// `plateau_tolerance` over this many epochs.
    pub plateau_epochs: usize,
    pub plateau_tolerance: f64,
    pub seed: u64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            hidden_width: 128,
            learning_rate: 0.05,
            batch_size: 32,
            max_epochs: 200,
            plateau_epochs: 10,
            plateau_tolerance: 1e-4,
            seed: 42,
        }
    }
}

/// Everything a pipeline run needs. Parsed from `key = value` lines; relative
/// paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub annotations: PathBuf,
    pub embeddings: PathBuf,
    pub ontology: PathBuf,
    pub taxonomy: PathBuf,
    pub output_dir: PathBuf,
    pub background_in: Option<PathBuf>,
    pub background_sibling: Option<PathBuf>,
    pub background_out: Option<PathBuf>,
    pub blacklist: Option<PathBuf>,
    pub whitelist: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub auxiliaries: Option<PathBuf>,
    pub curated_map: Option<PathBuf>,
    pub ef_static_map: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    /// Minimum in-domain / sibling-domain frequency ratio.
    pub generic_sibling_ratio: f64,
    /// Minimum in-domain / out-of-domain frequency ratio.
    pub generic_out_ratio: f64,
    pub min_support: usize,
    pub silhouette_target: f64,
    pub gate_threshold: f64,
    pub namespace: String,
    pub infer_to_fixpoint: bool,
    pub classifier: ClassifierParams,
}

impl PipelineConfig {
    /// A config with default thresholds around the four required inputs.
    pub fn with_inputs(
        annotations: impl Into<PathBuf>,
        embeddings: impl Into<PathBuf>,
        ontology: impl Into<PathBuf>,
        taxonomy: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            annotations: annotations.into(),
            embeddings: embeddings.into(),
            ontology: ontology.into(),
            taxonomy: taxonomy.into(),
            output_dir: PathBuf::from("out"),
            background_in: None,
            background_sibling: None,
            background_out: None,
            blacklist: None,
            whitelist: None,
            stopwords: None,
            auxiliaries: None,
            curated_map: None,
            ef_static_map: None,
            gold: None,
            generic_sibling_ratio: 2.0,
            generic_out_ratio: 10.0,
            min_support: 10,
            silhouette_target: 0.65,
            gate_threshold: 0.5,
            namespace: "http://example.org/scholarkg".into(),
            infer_to_fixpoint: false,
            classifier: ClassifierParams::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(path, base, &read_to_string(path)?)
    }

    pub fn parse(path: &Path, base_dir: &Path, text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::with_inputs("", "", "", "");
        cfg.output_dir = base_dir.join("out");
        let mut required = [
            ("annotations", false),
            ("embeddings", false),
            ("ontology", false),
            ("taxonomy", false),
        ];
        let resolve = |v: &str| base_dir.join(v);

        for (line_no, line) in content_lines(text) {
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(path, line_no, "expected `key = value`"))?;
            let err = |m: String| Error::parse(path, line_no, m);
            if let Some(slot) = required.iter_mut().find(|(k, _)| *k == key) {
                slot.1 = true;
            }
            match key {
                "annotations" => cfg.annotations = resolve(value),
                "embeddings" => cfg.embeddings = resolve(value),
                "ontology" => cfg.ontology = resolve(value),
                "taxonomy" => cfg.taxonomy = resolve(value),
                "output_dir" => cfg.output_dir = resolve(value),
                "background_in" => cfg.background_in = Some(resolve(value)),
                "background_sibling" => cfg.background_sibling = Some(resolve(value)),
                "background_out" => cfg.background_out = Some(resolve(value)),
                "blacklist" => cfg.blacklist = Some(resolve(value)),
                "whitelist" => cfg.whitelist = Some(resolve(value)),
                "stopwords" => cfg.stopwords = Some(resolve(value)),
                "auxiliaries" => cfg.auxiliaries = Some(resolve(value)),
                "curated_map" => cfg.curated_map = Some(resolve(value)),
                "ef_static_map" => cfg.ef_static_map = Some(resolve(value)),
                "gold" => cfg.gold = Some(resolve(value)),
                "generic_sibling_ratio" => cfg.generic_sibling_ratio = num(key, value).map_err(err)?,
                "generic_out_ratio" => cfg.generic_out_ratio = num(key, value).map_err(err)?,
                "min_support" => cfg.min_support = num(key, value).map_err(err)?,
                "silhouette_target" => cfg.silhouette_target = num(key, value).map_err(err)?,
                "gate_threshold" => cfg.gate_threshold = num(key, value).map_err(err)?,
                "namespace" => cfg.namespace = value.to_owned(),
                "infer_to_fixpoint" => cfg.infer_to_fixpoint = num(key, value).map_err(err)?,
                "hidden_width" => cfg.classifier.hidden_width = num(key, value).map_err(err)?,
                "learning_rate" => cfg.classifier.learning_rate = num(key, value).map_err(err)?,
                "batch_size" => cfg.classifier.batch_size = num(key, value).map_err(err)?,
                "max_epochs" => cfg.classifier.max_epochs = num(key, value).map_err(err)?,
                "plateau_epochs" => cfg.classifier.plateau_epochs = num(key, value).map_err(err)?,
                "plateau_tolerance" => {
                    cfg.classifier.plateau_tolerance = num(key, value).map_err(err)?
                }
                "seed" => cfg.classifier.seed = num(key, value).map_err(err)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if let Some((missing, _)) = required.iter().find(|(_, seen)| !seen) {
            return Err(Error::parse(path, 0, format!("missing required key `{missing}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if !(self.generic_sibling_ratio > 0.0 && self.generic_out_ratio > 0.0) {
            return fail("genericity thresholds must be positive");
        }
        if self.min_support == 0 {
            return fail("min_support must be positive");
        }
        if !(self.silhouette_target > -1.0 && self.silhouette_target <= 1.0) {
            return fail("silhouette_target must lie in (-1, 1]");
        }
        if !(self.gate_threshold > 0.0) {
            return fail("gate_threshold must be positive");
        }
        let c = &self.classifier;
        if c.hidden_width == 0 || c.batch_size == 0 || c.max_epochs == 0 || c.plateau_epochs == 0 {
            return fail("classifier sizes must be positive");
        }
        if !(c.learning_rate > 0.0) || !(c.plateau_tolerance >= 0.0) {
            return fail("classifier learning_rate must be positive");
        }
        let counts = [
            &self.background_in,
            &self.background_sibling,
            &self.background_out,
        ];
        let given = counts.iter().filter(|p| p.is_some()).count();
        if given != 0 && given != 3 {
            return fail("background_in, background_sibling and background_out go together");
        }
        Ok(())
    }

    /// Rendered back into `key = value` lines (paths as given).
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("annotations", self.annotations.display().to_string());
        put("embeddings", self.embeddings.display().to_string());
        put("ontology", self.ontology.display().to_string());
        put("taxonomy", self.taxonomy.display().to_string());
        put("output_dir", self.output_dir.display().to_string());
        for (k, v) in [
            ("background_in", &self.background_in),
            ("background_sibling", &self.background_sibling),
            ("background_out", &self.background_out),
            ("blacklist", &self.blacklist),
            ("whitelist", &self.whitelist),
            ("stopwords", &self.stopwords),
            ("auxiliaries", &self.auxiliaries),
            ("curated_map", &self.curated_map),
            ("ef_static_map", &self.ef_static_map),
            ("gold", &self.gold),
        ] {
            if let Some(p) = v {
                put(k, p.display().to_string());
            }
        }
        put("generic_sibling_ratio", self.generic_sibling_ratio.to_string());
        put("generic_out_ratio", self.generic_out_ratio.to_string());
        put("min_support", self.min_support.to_string());
        put("silhouette_target", self.silhouette_target.to_string());
        put("gate_threshold", self.gate_threshold.to_string());
        put("namespace", self.namespace.clone());
        put("infer_to_fixpoint", self.infer_to_fixpoint.to_string());
        let c = &self.classifier;
        put("hidden_width", c.hidden_width.to_string());
        put("learning_rate", c.learning_rate.to_string());
        put("batch_size", c.batch_size.to_string());
        put("max_epochs", c.max_epochs.to_string());
        put("plateau_epochs", c.plateau_epochs.to_string());
        put("plateau_tolerance", c.plateau_tolerance.to_string());
        put("seed", c.seed.to_string());
        out
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}
