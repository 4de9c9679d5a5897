//! Hierarchical content names.
//!
//! A [`Name`] is an ordered list of non-empty opaque byte components. The
//! canonical text form is `/` followed by the components joined by `/`.
//! Bytes outside printable ASCII, and the characters `/` and `%`, are written
//! as `%XX` so that every name survives a print/parse round trip.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("malformed name {text:?}: {reason}")]
    MalformedName { text: String, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    components: Vec<Vec<u8>>,
}

impl Name {
    /// Builds a name from raw components. Fails if the list is empty or any
    /// component is empty.
    pub fn from_components<I, C>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = C>,
        C: Into<Vec<u8>>,
    {
        let components: Vec<Vec<u8>> = components.into_iter().map(Into::into).collect();
        if components.is_empty() {
            return Err(malformed("", "no components"));
        }
        if components.iter().any(Vec::is_empty) {
            return Err(malformed("", "empty component"));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Vec<u8>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True iff `self` is a leading sublist of `other`.
    pub fn is_prefix_of(&self, other: &Name) -> bool {
        self.components.len() <= other.components.len()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a == b)
    }

    /// The first `len` components. `len` is clamped to `1..=self.len()`.
    pub fn prefix(&self, len: usize) -> Name {
        let len = len.clamp(1, self.components.len());
        Name {
            components: self.components[..len].to_vec(),
        }
    }

    /// Appends one component.
    pub fn child(&self, component: impl Into<Vec<u8>>) -> Result<Name, NameError> {
        let component = component.into();
        if component.is_empty() {
            return Err(malformed(&self.to_string(), "empty component"));
        }
        let mut components = self.components.clone();
        components.push(component);
        Ok(Name { components })
    }

    /// Returns a copy with component `index` replaced.
    pub fn with_component(&self, index: usize, component: impl Into<Vec<u8>>) -> Option<Name> {
        let component = component.into();
        if component.is_empty() || index >= self.components.len() {
            return None;
        }
        let mut components = self.components.clone();
        components[index] = component;
        Some(Name { components })
    }
}

fn malformed(text: &str, reason: &'static str) -> NameError {
    NameError::MalformedName {
        text: text.to_string(),
        reason,
    }
}

/// Parses the canonical text form.
pub fn parse_name(text: &str) -> Result<Name, NameError> {
    if text.is_empty() {
        return Err(malformed(text, "empty text"));
    }
    let rest = text
        .strip_prefix('/')
        .ok_or_else(|| malformed(text, "missing leading '/'"))?;
    let mut components = Vec::new();
    for segment in rest.split('/') {
        if segment.is_empty() {
            return Err(malformed(text, "empty component"));
        }
        components.push(unescape(segment).ok_or_else(|| malformed(text, "bad escape"))?);
    }
    Ok(Name { components })
}

fn unescape(segment: &str) -> Option<Vec<u8>> {
    let bytes = segment.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = segment.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    Some(out)
}

fn needs_escape(b: u8) -> bool {
    !(0x21..=0x7e).contains(&b) || b == b'/' || b == b'%'
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for component in &self.components {
            f.write_str("/")?;
            for &b in component {
                if needs_escape(b) {
                    write!(f, "%{b:02X}")?;
                } else {
                    write!(f, "{}", b as char)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_name(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_name(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(s: &str) -> Name {
        parse_name(s).unwrap()
    }

    #[test]
    fn parses_components() {
        let name = n("/traffic/monitor/seg1");
        let expected: Vec<Vec<u8>> = vec![b"traffic".to_vec(), b"monitor".to_vec(), b"seg1".to_vec()];
        assert_eq!(name.components(), expected.as_slice());
        assert_eq!(n("/a").components(), &[b"a".to_vec()]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "//x", "a/b", "/", "/a/", "/a//b", "/%zz"] {
            assert!(parse_name(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn prefix_relation() {
        assert!(n("/traffic").is_prefix_of(&n("/traffic/monitor")));
        assert!(!n("/traffic/monitor").is_prefix_of(&n("/traffic")));
        assert!(n("/a").is_prefix_of(&n("/a")));
        assert!(!n("/ab").is_prefix_of(&n("/a/b")));
    }

    #[test]
    fn escapes_reserved_bytes() {
        let name = Name::from_components([b"a/b".to_vec(), vec![0u8, 0xff], b"100%".to_vec()]).unwrap();
        assert_eq!(name.to_string(), "/a%2Fb/%00%FF/100%25");
        assert_eq!(n(&name.to_string()), name);
    }

    fn arb_name() -> impl Strategy<Value = Name> {
        prop::collection::vec(prop::collection::vec(any::<u8>(), 1..6), 1..5)
            .prop_map(|c| Name::from_components(c).unwrap())
    }

    proptest! {
        #[test]
        fn canonical_round_trip(name in arb_name()) {
            prop_assert_eq!(parse_name(&name.to_string()).unwrap(), name);
        }

        #[test]
        fn prefix_antisymmetric_on_equal_length(a in arb_name(), b in arb_name()) {
            if a.len() == b.len() && a.is_prefix_of(&b) && b.is_prefix_of(&a) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn every_truncation_is_a_prefix(name in arb_name(), k in 1usize..5) {
            prop_assert!(name.prefix(k).is_prefix_of(&name));
        }
    }
}
