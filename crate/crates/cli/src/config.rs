use std::fmt;

use lgqp::ScanConfig;

/// A config that failed to parse, located by 1-based line and column.
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse(text: &str) -> Result<ScanConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| locate(text, s.start));
        ConfigError {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
plane = "x0p0"
route = "integral"
s1 = 1
s2 = -1
axis1 = { min = -1.0, max = 1.0, steps = 3 }
axis2 = { min = 0.0, max = 2.0, steps = 2 }
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.t2_search.coarse_steps, 200);
        assert_eq!(c.t2_search.refine_iters, 40);
        assert_eq!(c.omega, 1.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn errors_carry_positions() {
        let bad = MINIMAL.replace("steps = 2", "steps = \"two\"");
        let e = parse(&bad).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.column > 1);
        let e = parse("plane = \"x0p0\"\nbogus = 3\n").unwrap_err();
        assert!(e.line >= 1, "{e}");
    }

    #[test]
    fn locate_counts_from_one() {
        assert_eq!(locate("ab\ncd", 0), (1, 1));
        assert_eq!(locate("ab\ncd", 4), (2, 2));
    }
}
