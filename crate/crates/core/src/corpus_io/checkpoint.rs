//! Binary model checkpoint.
//!
//! Layout, all integers `u32` little-endian and strings length-prefixed UTF-8:
//! magic `MPWA`, version, metadata pairs, language list, (language, word)
//! list, then named tensors as `name, ndim, dims…, f32 LE data`.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use crate::community::LpcConfig;
use crate::features::{
    Ablation, CommunitySettings, FeatureConfig, FeatureStandardizer, FeatureVocab, StandardizeMode,
};
use crate::gnn::{GnnModel, ModelConfig, ModelParams};
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"MPWA";

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Decoded checkpoint contents before validation against a model layout.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub metadata: BTreeMap<String, String>,
    pub languages: Vec<String>,
    pub words: Vec<(String, String)>,
    pub tensors: Vec<NamedTensor>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u32()? as usize;
        // Any count must fit in the remaining bytes.
        if n > self.0.len() {
            return Err(Error::Truncated);
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("invalid UTF-8".into()))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(MAGIC.to_vec());
        w.0.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        w.u32(self.metadata.len());
        for (k, v) in &self.metadata {
            w.str(k);
            w.str(v);
        }
        w.u32(self.languages.len());
        for l in &self.languages {
            w.str(l);
        }
        w.u32(self.words.len());
        for (l, word) in &self.words {
            w.str(l);
            w.str(word);
        }
        w.u32(self.tensors.len());
        for t in &self.tensors {
            w.str(&t.name);
            w.u32(t.shape.len());
            for &d in &t.shape {
                w.u32(d);
            }
            for v in &t.data {
                w.0.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader(bytes);
        if r.take(4).map_err(|_| Error::BadMagic)? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let mut c = Checkpoint::default();
        for _ in 0..r.len()? {
            let k = r.str()?;
            c.metadata.insert(k, r.str()?);
        }
        for _ in 0..r.len()? {
            c.languages.push(r.str()?);
        }
        for _ in 0..r.len()? {
            let l = r.str()?;
            c.words.push((l, r.str()?));
        }
        for _ in 0..r.len()? {
            let name = r.str()?;
            let ndim = r.len()?;
            let shape = (0..ndim).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let count: usize = shape.iter().product();
            let raw = r.take(count.checked_mul(4).ok_or(Error::Truncated)?)?;
            let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            c.tensors.push(NamedTensor { name, shape, data });
        }
        if !r.0.is_empty() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", r.0.len())));
        }
        Ok(c)
    }

    pub fn from_model(m: &GnnModel) -> Self {
        let f = &m.config.features;
        let mut meta = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            meta.insert(k.to_owned(), v);
        };
        put("hidden", m.config.hidden.to_string());
        put("leaky_slope", format!("{:?}", m.config.leaky_slope));
        put("centrality_dim", f.centrality_dim.to_string());
        put("community_dim", f.community_dim.to_string());
        put("community_slots", f.community_slots.to_string());
        put("position_dim", f.position_dim.to_string());
        put("position_slots", f.position_slots.to_string());
        put("language_dim", f.language_dim.to_string());
        put("word_dim", f.word_dim.to_string());
        put("ablation", f.ablation.names().join(","));
        put(
            "standardize",
            match m.standardize_mode {
                StandardizeMode::Global => "global",
                StandardizeMode::PerGraph => "per-graph",
            }
            .to_owned(),
        );
        put("gamma", format!("{:?}", m.community.gamma));
        put("community_seed", m.community.seed.to_string());
        put("lpc_update_fraction", format!("{:?}", m.community.lpc.update_fraction));
        put("lpc_max_iterations", m.community.lpc.max_iterations.to_string());

        let mut tensors = vec![
            NamedTensor {
                name: "standardizer.mean".into(),
                shape: vec![5],
                data: m.standardizer.mean.to_vec(),
            },
            NamedTensor {
                name: "standardizer.std".into(),
                shape: vec![5],
                data: m.standardizer.std.to_vec(),
            },
        ];
        for (name, t) in m.params.tensors() {
            tensors.push(NamedTensor {
                name: name.to_owned(),
                shape: t.shape().to_vec(),
                data: t.iter().copied().collect(),
            });
        }
        Self {
            metadata: meta,
            languages: m.vocab.languages().to_vec(),
            words: m.vocab.words().to_vec(),
            tensors,
        }
    }

    fn meta<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.metadata
            .get(key)
            .ok_or_else(|| Error::Checkpoint(format!("missing metadata `{key}`")))?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("bad metadata `{key}`")))
    }

    fn config(&self) -> Result<ModelConfig> {
        let features = FeatureConfig {
            centrality_dim: self.meta("centrality_dim")?,
            community_dim: self.meta("community_dim")?,
            community_slots: self.meta("community_slots")?,
            position_dim: self.meta("position_dim")?,
            position_slots: self.meta("position_slots")?,
            language_dim: self.meta("language_dim")?,
            word_dim: self.meta("word_dim")?,
            ablation: Ablation::parse_list(&self.meta::<String>("ablation")?)?,
        };
        Ok(ModelConfig {
            features,
            hidden: self.meta("hidden")?,
            leaky_slope: self.meta("leaky_slope")?,
        })
    }

    /// Rebuilds the model. With `expected`, every tensor must have the shape
    /// that configuration implies.
    pub fn into_model(self, expected: Option<&ModelConfig>) -> Result<GnnModel> {
        let stored = self.config()?;
        let config = expected.copied().unwrap_or(stored);
        let vocab = FeatureVocab::new(self.languages.clone(), self.words.clone());
        let mut params = ModelParams::<f32>::zeros(&config, vocab.languages().len(), vocab.word_rows());
        let mut by_name: BTreeMap<&str, &NamedTensor> =
            self.tensors.iter().map(|t| (t.name.as_str(), t)).collect();
        let mut stat = |name: &str| -> Result<[f32; 5]> {
            let t = by_name
                .remove(name)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor `{name}`")))?;
            t.data.as_slice().try_into().map_err(|_| Error::DimensionMismatch {
                name: name.to_owned(),
                expected: vec![5],
                found: t.shape.clone(),
            })
        };
        let standardizer = FeatureStandardizer {
            mean: stat("standardizer.mean")?,
            std: stat("standardizer.std")?,
        };
        for (name, dst) in params.tensors_mut() {
            let t = by_name
                .remove(name)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor `{name}`")))?;
            if t.shape != dst.shape() {
                return Err(Error::DimensionMismatch {
                    name: name.to_owned(),
                    expected: dst.shape().to_vec(),
                    found: t.shape.clone(),
                });
            }
            *dst = Array2::from_shape_vec(dst.raw_dim(), t.data.clone()).expect("shape checked");
        }
        if let Some(name) = by_name.keys().next() {
            return Err(Error::Checkpoint(format!("unexpected tensor `{name}`")));
        }
        Ok(GnnModel {
            config,
            params,
            standardizer,
            standardize_mode: self.meta::<String>("standardize")?.parse()?,
            community: CommunitySettings {
                gamma: self.meta("gamma")?,
                seed: self.meta("community_seed")?,
                lpc: LpcConfig {
                    update_fraction: self.meta("lpc_update_fraction")?,
                    max_iterations: self.meta("lpc_max_iterations")?,
                },
            },
            vocab,
        })
    }
}

pub fn save_checkpoint(path: &Path, model: &GnnModel) -> Result<()> {
    std::fs::write(path, Checkpoint::from_model(model).to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path, expected: Option<&ModelConfig>) -> Result<GnnModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)?.into_model(expected)
}
