//! Minimal robots exclusion: `User-agent`, `Allow` and `Disallow` lines.

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RobotsRules {
    /// (path prefix, allowed)
    rules: Vec<(String, bool)>,
}

impl RobotsRules {
    pub fn allow_all() -> Self {
        RobotsRules::default()
    }

    /// Rules from the group naming `agent` if present, else the `*` group.
    pub fn parse(text: &str, agent: &str) -> Self {
        let agent = agent.to_ascii_lowercase();
        let mut specific: Option<Vec<(String, bool)>> = None;
        let mut wildcard: Option<Vec<(String, bool)>> = None;
        // Agents named by the group being read, and whether rules have started.
        let mut group_agents: Vec<String> = Vec::new();
        let mut in_rules = false;
        let mut current: Vec<(String, bool)> = Vec::new();

        let mut close = |agents: &[String], rules: &mut Vec<(String, bool)>| {
            for a in agents {
                if a == "*" {
                    wildcard.get_or_insert_with(Vec::new).extend(rules.iter().cloned());
                } else if agent.contains(a.as_str()) {
                    specific.get_or_insert_with(Vec::new).extend(rules.iter().cloned());
                }
            }
            rules.clear();
        };

        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once(':') else {
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "user-agent" => {
                    if in_rules {
                        close(&group_agents, &mut current);
                        group_agents.clear();
                        in_rules = false;
                    }
                    group_agents.push(value.to_ascii_lowercase());
                }
                "disallow" | "allow" => {
                    in_rules = true;
                    if !value.is_empty() {
                        current.push((value.to_string(), key == "allow"));
                    }
                }
                _ => {}
            }
        }
        close(&group_agents, &mut current);
        RobotsRules {
            rules: specific.or(wildcard).unwrap_or_default(),
        }
    }

    /// Longest matching prefix decides; `Allow` wins ties.
    pub fn is_allowed(&self, path: &str) -> bool {
        let mut best: Option<(usize, bool)> = None;
        for (prefix, allow) in &self.rules {
            if path.starts_with(prefix.as_str()) {
                let better = match best {
                    None => true,
                    Some((len, a)) => prefix.len() > len || (prefix.len() == len && *allow && !a),
                };
                if better {
                    best = Some((prefix.len(), *allow));
                }
            }
        }
        best.is_none_or(|(_, allow)| allow)
    }
}
