use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ISO-639 style language code: 2-3 lowercase ASCII letters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Lang(String);

impl Lang {
    pub fn new(code: &str) -> Result<Self> {
        let ok = (2..=3).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase());
        if ok {
            Ok(Lang(code.to_string()))
        } else {
            Err(Error::InvalidLanguage(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Lang {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Lang::new(s)
    }
}

impl TryFrom<String> for Lang {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Lang::new(&s)
    }
}

impl From<Lang> for String {
    fn from(l: Lang) -> String {
        l.0
    }
}

/// The (source, target) language pair being mined. The two sides differ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguagePair {
    src: Lang,
    tgt: Lang,
}

/// Formats as `src-tgt`.
impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

impl LanguagePair {
    pub fn new(src: Lang, tgt: Lang) -> Result<Self> {
        if src == tgt {
            return Err(Error::invalid(format!("source and target language are both {src}")));
        }
        Ok(LanguagePair { src, tgt })
    }

    pub fn parse(src: &str, tgt: &str) -> Result<Self> {
        LanguagePair::new(Lang::new(src)?, Lang::new(tgt)?)
    }

    pub fn src(&self) -> &Lang {
        &self.src
    }

    pub fn tgt(&self) -> &Lang {
        &self.tgt
    }

    pub fn reversed(&self) -> LanguagePair {
        LanguagePair {
            src: self.tgt.clone(),
            tgt: self.src.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert!(Lang::new("en").is_ok());
        assert!(Lang::new("eng").is_ok());
        assert!(Lang::new("EN").is_err());
        assert!(Lang::new("e").is_err());
        assert!(Lang::new("engl").is_err());
        assert!(Lang::new("é1").is_err());
    }

    #[test]
    fn pair_sides_differ() {
        assert!(LanguagePair::parse("en", "en").is_err());
        let p = LanguagePair::parse("fr", "en").unwrap();
        assert_eq!(p.reversed().src().as_str(), "en");
    }

    #[test]
    fn serde_validates() {
        assert!(serde_json::from_str::<Lang>("\"de\"").is_ok());
        assert!(serde_json::from_str::<Lang>("\"DE\"").is_err());
    }
}
