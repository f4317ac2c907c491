use std::fmt;

use llmshap_core::{Method, OutsideFeatures, WindowSpec};

use crate::UsageError;

/// One entry of a `--methods` list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MethodSpec {
    pub method: Method,
    pub window: Option<usize>,
}

impl MethodSpec {
    pub fn window_spec(&self, outside: OutsideFeatures, cached: bool) -> Option<WindowSpec> {
        self.window
            .map(|w| WindowSpec::new(w).with_outside(outside).with_cache(cached))
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.window {
            Some(w) => write!(f, "{}={w}", self.method),
            None => write!(f, "{}", self.method),
        }
    }
}

/// Parses `exact,cached,sliding_window=3,counterfactual`. A bare
/// `sliding_window` takes `default_window`; `:` works as well as `=`.
pub fn parse_methods(list: &str, default_window: usize) -> Result<Vec<MethodSpec>, UsageError> {
    let mut specs = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, width) = match item.split_once(['=', ':']) {
            Some((n, w)) => {
                let w: usize = w
                    .trim()
                    .parse()
                    .map_err(|_| UsageError(format!("bad window width in {item:?}")))?;
                (n, Some(w))
            }
            None => (item, None),
        };
        let method: Method = name.parse().map_err(UsageError)?;
        let window = match (method, width) {
            (Method::SlidingWindow, Some(0)) => {
                return Err(UsageError(format!("window width must be positive in {item:?}")))
            }
            (Method::SlidingWindow, w) => Some(w.unwrap_or(default_window)),
            (_, Some(_)) => return Err(UsageError(format!("only sliding_window takes a width: {item:?}"))),
            (_, None) => None,
        };
        let spec = MethodSpec { method, window };
        if !specs.contains(&spec) {
            specs.push(spec);
        }
    }
    if specs.is_empty() {
        return Err(UsageError("empty method list".into()));
    }
    Ok(specs)
}
