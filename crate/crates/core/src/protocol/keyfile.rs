//! Text key files and the consumption journal.
//!
//! A key file is one header line of `key=value` fields followed by one line
//! per signing act holding that act's strings in hex, separated by spaces.
//! Key files are never rewritten: consumed acts are appended to a separate
//! journal, one `consumed <act>` line each.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use crate::bits::BitString;
use crate::error::{FormatError, ProtocolError};
use crate::gf::GF256_REDUCTION;
use crate::hash::Scheme;

use super::keys::{KeyGroups, PermutationSeeds, Role};

const MAGIC: &str = "qds-keys";

fn seed_field(s: Option<u64>) -> String {
    s.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn write_key_file(groups: &KeyGroups) -> String {
    let modulus = match groups.scheme() {
        Scheme::Lfsr => "per-signature".to_string(),
        Scheme::Gdh => format!("gf256:{GF256_REDUCTION:x}"),
    };
    let seeds = groups.seeds();
    let mut out = format!(
        "{MAGIC} scheme={} n={} role={} modulus={} seed_bob={} seed_charlie={} acts={}\n",
        groups.scheme(),
        groups.n(),
        groups.role(),
        modulus,
        seed_field(seeds.bob),
        seed_field(seeds.charlie),
        groups.len()
    );
    for act in groups.raw_acts() {
        let line: Vec<String> = act.iter().map(BitString::to_hex).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_key_file(text: &str) -> Result<KeyGroups, ProtocolError> {
    let bad = |m: &str| ProtocolError::Format(FormatError::Malformed(m.to_string()));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty key file"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(bad("missing key file header"));
    }
    let (mut scheme, mut n, mut role, mut acts) = (None, None, None, None);
    let mut seeds = PermutationSeeds::default();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| bad("header field without '='"))?;
        let seed = || -> Result<Option<u64>, ProtocolError> {
            if v == "-" {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| bad("bad seed"))
            }
        };
        match k {
            "scheme" => scheme = Some(v.parse::<Scheme>().map_err(|e| bad(&e))?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad("bad n"))?),
            "role" => role = Some(v.parse::<Role>().map_err(|e| bad(&e))?),
            "acts" => acts = Some(v.parse::<usize>().map_err(|_| bad("bad act count"))?),
            "seed_bob" => seeds.bob = seed()?,
            "seed_charlie" => seeds.charlie = seed()?,
            _ => {}
        }
    }
    let scheme = scheme.ok_or_else(|| bad("header lacks scheme"))?;
    let n = n.ok_or_else(|| bad("header lacks n"))?;
    let role = role.ok_or_else(|| bad("header lacks role"))?;
    let mut groups = Vec::new();
    for line in lines {
        let strings = line
            .split_whitespace()
            .map(|h| BitString::from_hex(h, n))
            .collect::<Result<Vec<_>, _>>()?;
        groups.push(strings);
    }
    if acts.is_some_and(|a| a != groups.len()) {
        return Err(bad("act count does not match the header"));
    }
    KeyGroups::from_acts(scheme, n, role, seeds, groups)
}

/// Acts recorded as consumed. A missing journal means nothing is consumed.
pub fn read_journal(path: &Path) -> Result<BTreeSet<usize>, ProtocolError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeSet::new()),
        Err(e) => return Err(ProtocolError::Transport(format!("{}: {e}", path.display()))),
    };
    let mut out = BTreeSet::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let act = line
            .strip_prefix("consumed ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| FormatError::Malformed(format!("bad journal line {line:?}")))?;
        out.insert(act);
    }
    Ok(out)
}

pub fn append_journal(path: &Path, act: usize) -> Result<(), ProtocolError> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| ProtocolError::Transport(format!("{}: {e}", path.display())))?;
    writeln!(f, "consumed {act}")
        .map_err(|e| ProtocolError::Transport(format!("{}: {e}", path.display())))
}

/// Loads a key file and applies its journal.
pub fn load_key_groups(key_path: &Path, journal: &Path) -> Result<KeyGroups, ProtocolError> {
    let text = std::fs::read_to_string(key_path)
        .map_err(|e| ProtocolError::Transport(format!("{}: {e}", key_path.display())))?;
    let mut groups = parse_key_file(&text)?;
    for act in read_journal(journal)? {
        groups.mark_consumed(act);
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::keys::perfect_key_groups;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn roundtrip_both_schemes() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for (scheme, n) in [(Scheme::Lfsr, 19), (Scheme::Gdh, 24)] {
            for g in perfect_key_groups(scheme, n, 3, &mut rng).unwrap() {
                let text = write_key_file(&g);
                assert_eq!(parse_key_file(&text).unwrap(), g);
            }
        }
    }

    #[test]
    fn journal_marks_acts() {
        let dir = std::env::temp_dir().join(format!("qds-journal-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let [alice, _, _] = perfect_key_groups(Scheme::Gdh, 16, 2, &mut rng).unwrap();
        let keys = dir.join("alice.keys");
        let journal = dir.join("alice.journal");
        std::fs::write(&keys, write_key_file(&alice)).unwrap();
        let _ = std::fs::remove_file(&journal);
        append_journal(&journal, 1).unwrap();
        let mut g = load_key_groups(&keys, &journal).unwrap();
        assert!(g.consume(0).is_ok());
        assert!(matches!(g.consume(1), Err(ProtocolError::OneTimeViolation { act: 1 })));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn header_mismatch_is_rejected() {
        assert!(parse_key_file("").is_err());
        assert!(parse_key_file("qds-keys scheme=gdh n=8 role=bob acts=2\n00 00\n").is_err());
        assert!(parse_key_file("qds-keys scheme=gdh n=8 role=bob acts=1\n00\n").is_err());
    }
}
