use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Labels {
    pub node: Option<String>,
    pub session: Option<String>,
    pub cause: Option<String>,
}

impl Labels {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn node(node: &str) -> Self {
        Self {
            node: Some(node.to_string()),
            ..Self::default()
        }
    }

    pub fn cause(mut self, cause: &str) -> Self {
        self.cause = Some(cause.to_string());
        self
    }

    pub fn session(mut self, session: impl fmt::Display) -> Self {
        self.session = Some(session.to_string());
        self
    }
}

impl fmt::Display for Labels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [("node", &self.node), ("session", &self.session), ("cause", &self.cause)]
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}")))
            .collect();
        if parts.is_empty() {
            f.write_str("-")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRecord {
    pub name: String,
    pub labels: Labels,
    pub value: u64,
}

impl fmt::Display for MetricRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.name, self.labels, self.value)
    }
}

/// Monotone counters; only `inc` mutates them.
#[derive(Debug, Clone, Default)]
pub struct Metrics {
    counters: BTreeMap<(String, Labels), u64>,
}

impl Metrics {
    pub fn inc(&mut self, name: &str, labels: Labels, by: u64) {
        *self.counters.entry((name.to_string(), labels)).or_insert(0) += by;
    }

    pub fn get(&self, name: &str, labels: &Labels) -> u64 {
        self.counters.get(&(name.to_string(), labels.clone())).copied().unwrap_or(0)
    }

    /// Sum over all label sets.
    pub fn total(&self, name: &str) -> u64 {
        self.counters
            .iter()
            .filter(|((n, _), _)| n == name)
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn records(&self) -> Vec<MetricRecord> {
        self.counters
            .iter()
            .map(|((name, labels), value)| MetricRecord {
                name: name.clone(),
                labels: labels.clone(),
                value: *value,
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_rendering() {
        let mut m = Metrics::default();
        m.inc("drops", Labels::node("ulcl-1").cause("no-match"), 2);
        m.inc("cache_hits", Labels::node("icn-ap-1"), 1);
        m.inc("drops", Labels::none(), 1);
        assert_eq!(
            m.render(),
            "cache_hits node=icn-ap-1 1\ndrops - 1\ndrops node=ulcl-1,cause=no-match 2\n"
        );
        assert_eq!(m.total("drops"), 3);
    }
}
