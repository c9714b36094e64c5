use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ontology category a characterization belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Mitigation,
    ImpactMethod,
    LogicalImpact,
    Location,
    Scope,
}

impl Category {
    pub fn display_name(self) -> &'static str {
        match self {
            Category::Mitigation => "Mitigation",
            Category::ImpactMethod => "Impact Method",
            Category::LogicalImpact => "Logical Impact",
            Category::Location => "Location",
            Category::Scope => "Scope",
        }
    }
}

/// One of the 19 Vulnerability Description Ontology characterizations
/// used as class labels.
///
/// The discriminant is the canonical index (0..=18) and orders the labels
/// the way the ontology table lists them. Every tie-break in the crate that
/// says "lowest index" refers to this ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Characterization {
    Aslr = 0,
    MultiFactorAuthentication,
    Sandboxed,
    Hpkp,
    Hsts,
    PhysicalSecurity,
    ContextEscape,
    TrustFailure,
    ManInTheMiddle,
    Write,
    Read,
    ServiceInterrupt,
    IndirectDisclosure,
    PrivilegeEscalation,
    Memory,
    FileSystem,
    NetworkTraffic,
    Limited,
    Unlimited,
}

impl Characterization {
    pub const COUNT: usize = 19;

    pub const ALL: [Characterization; Self::COUNT] = [
        Characterization::Aslr,
        Characterization::MultiFactorAuthentication,
        Characterization::Sandboxed,
        Characterization::Hpkp,
        Characterization::Hsts,
        Characterization::PhysicalSecurity,
        Characterization::ContextEscape,
        Characterization::TrustFailure,
        Characterization::ManInTheMiddle,
        Characterization::Write,
        Characterization::Read,
        Characterization::ServiceInterrupt,
        Characterization::IndirectDisclosure,
        Characterization::PrivilegeEscalation,
        Characterization::Memory,
        Characterization::FileSystem,
        Characterization::NetworkTraffic,
        Characterization::Limited,
        Characterization::Unlimited,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Stable machine key, e.g. `man_in_the_middle`.
    pub fn name(self) -> &'static str {
        use Characterization::*;
        match self {
            Aslr => "aslr",
            MultiFactorAuthentication => "multi_factor_authentication",
            Sandboxed => "sandboxed",
            Hpkp => "hpkp",
            Hsts => "hsts",
            PhysicalSecurity => "physical_security",
            ContextEscape => "context_escape",
            TrustFailure => "trust_failure",
            ManInTheMiddle => "man_in_the_middle",
            Write => "write",
            Read => "read",
            ServiceInterrupt => "service_interrupt",
            IndirectDisclosure => "indirect_disclosure",
            PrivilegeEscalation => "privilege_escalation",
            Memory => "memory",
            FileSystem => "file_system",
            NetworkTraffic => "network_traffic",
            Limited => "limited",
            Unlimited => "unlimited",
        }
    }

    pub fn display_name(self) -> &'static str {
        use Characterization::*;
        match self {
            Aslr => "ASLR",
            MultiFactorAuthentication => "Multi-Factor Authentication",
            Sandboxed => "Sandboxed",
            Hpkp => "HPKP",
            Hsts => "HSTS",
            PhysicalSecurity => "Physical Security",
            ContextEscape => "Context Escape",
            TrustFailure => "Trust Failure",
            ManInTheMiddle => "Man-in-the-Middle",
            Write => "Write",
            Read => "Read",
            ServiceInterrupt => "Service Interrupt",
            IndirectDisclosure => "Indirect Disclosure",
            PrivilegeEscalation => "Privilege Escalation",
            Memory => "Memory",
            FileSystem => "File System",
            NetworkTraffic => "Network Traffic",
            Limited => "Limited",
            Unlimited => "Unlimited",
        }
    }

    pub fn category(self) -> Category {
        match self.index() {
            0..=5 => Category::Mitigation,
            6..=8 => Category::ImpactMethod,
            9..=13 => Category::LogicalImpact,
            14..=16 => Category::Location,
            _ => Category::Scope,
        }
    }
}

impl fmt::Display for Characterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown characterization label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for Characterization {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn index_is_a_bijection() {
        let indices: HashSet<usize> = Characterization::ALL.iter().map(|c| c.index()).collect();
        assert_eq!(indices.len(), 19);
        for (i, c) in Characterization::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(Characterization::from_index(i), Some(*c));
        }
        assert_eq!(Characterization::from_index(19), None);
    }

    #[test]
    fn category_memberships() {
        let members = |cat: Category| -> Vec<&'static str> {
            Characterization::ALL
                .iter()
                .filter(|c| c.category() == cat)
                .map(|c| c.name())
                .collect()
        };
        assert_eq!(
            members(Category::Mitigation),
            [
                "aslr",
                "multi_factor_authentication",
                "sandboxed",
                "hpkp",
                "hsts",
                "physical_security"
            ]
        );
        assert_eq!(
            members(Category::ImpactMethod),
            ["context_escape", "trust_failure", "man_in_the_middle"]
        );
        assert_eq!(
            members(Category::LogicalImpact),
            [
                "write",
                "read",
                "service_interrupt",
                "indirect_disclosure",
                "privilege_escalation"
            ]
        );
        assert_eq!(
            members(Category::Location),
            ["memory", "file_system", "network_traffic"]
        );
        assert_eq!(members(Category::Scope), ["limited", "unlimited"]);
    }

    #[test]
    fn names_parse_back() {
        for c in Characterization::ALL {
            assert_eq!(c.name().parse::<Characterization>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.name()));
        }
        assert!("reed".parse::<Characterization>().is_err());
        assert!("Read".parse::<Characterization>().is_err());
    }
}
