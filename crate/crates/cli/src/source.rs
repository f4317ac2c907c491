use std::sync::Arc;

use anyhow::Context;
use llmshap_llm::{
    Backend, DatasetError, GrandPayoff, HttpBackend, InferenceConfig, KeywordBackend, LlmPayoff, Mode,
    PromptTemplate, TranscriptStore,
};

use crate::args::{BackendArg, GrandArg, LlmArgs};
use crate::usage;

pub fn inference_config(args: &LlmArgs, seed: Option<u64>) -> anyhow::Result<InferenceConfig> {
    let mut cfg = if args.deterministic {
        InferenceConfig::deterministic()
    } else {
        InferenceConfig::default()
    };
    if let Some(m) = &args.model {
        cfg.model_name = m.clone();
    }
    if let Some(t) = args.temperature {
        cfg.temperature = t;
    }
    if seed.is_some() {
        cfg.seed = seed;
    }
    if let Some(e) = &args.endpoint {
        cfg.endpoint_url = e.clone();
    }
    if let Some(e) = &args.embedding_model {
        cfg.embedding_model = e.clone();
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

pub fn open_store(args: &LlmArgs, cfg: &InferenceConfig) -> anyhow::Result<Arc<TranscriptStore>> {
    let mode: Mode = args.mode.into();
    let store = match mode {
        Mode::Replay => {
            let path = args
                .transcript
                .as_ref()
                .ok_or_else(|| usage("--mode replay needs --transcript"))?;
            TranscriptStore::replay(path).with_context(|| format!("loading transcript {}", path.display()))?
        }
        Mode::Record => {
            let path = args
                .transcript
                .as_ref()
                .ok_or_else(|| usage("--mode record needs --transcript"))?;
            TranscriptStore::record(path, backend(args.backend, cfg)?)
                .with_context(|| format!("creating transcript {}", path.display()))?
        }
        Mode::Live => {
            if args.transcript.is_some() {
                log::warn!("--transcript is ignored in live mode");
            }
            TranscriptStore::live(backend(args.backend, cfg)?)
        }
    };
    Ok(Arc::new(store))
}

fn backend(kind: BackendArg, cfg: &InferenceConfig) -> anyhow::Result<Arc<dyn Backend>> {
    Ok(match kind {
        BackendArg::Http => Arc::new(HttpBackend::from_env(cfg)?),
        BackendArg::Offline => Arc::new(KeywordBackend::new()),
    })
}

pub fn grand_payoff(arg: GrandArg) -> GrandPayoff {
    match arg {
        GrandArg::Fresh => GrandPayoff::FreshDraw,
        GrandArg::Pinned => GrandPayoff::PinnedBase,
    }
}

pub fn payoff(
    features: &llmshap_core::FeatureSet,
    cfg: &InferenceConfig,
    store: &Arc<TranscriptStore>,
    grand: GrandArg,
) -> anyhow::Result<LlmPayoff> {
    LlmPayoff::new(
        features.clone(),
        PromptTemplate::symptoms(),
        cfg.clone(),
        store.clone(),
        grand_payoff(grand),
    )
    .context("drawing the base answer")
}

pub fn load_dataset(path: &std::path::Path) -> anyhow::Result<llmshap_llm::Dataset> {
    match llmshap_llm::ingest_dataset(path) {
        Ok(d) => Ok(d),
        Err(DatasetError::Io(e)) => Err(usage(format!("cannot read dataset {}: {e}", path.display()))),
        Err(e) => Err(e.into()),
    }
}
