use std::path::PathBuf;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_SAMPLE_CAP: usize = 10_000_000;
pub const DEFAULT_MAX_JOBS: usize = 4;
pub const DEFAULT_STATIC_DIR: &str = "web-ui/dist";

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub port: u16,
    /// Largest `samples` value a request may ask for.
    pub sample_cap: usize,
    /// Worker threads for simulations; 0 picks one per core.
    pub threads: usize,
    /// Simulations allowed to run at the same time.
    pub max_jobs: usize,
    pub static_dir: PathBuf,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            sample_cap: DEFAULT_SAMPLE_CAP,
            threads: 0,
            max_jobs: DEFAULT_MAX_JOBS,
            static_dir: PathBuf::from(DEFAULT_STATIC_DIR),
        }
    }
}

impl ServiceConfig {
    /// Reads `MOONLAB_PORT`, `MOONLAB_SAMPLE_CAP`, `MOONLAB_THREADS`,
    /// `MOONLAB_MAX_JOBS` and `MOONLAB_STATIC_DIR`.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        fn parse<T: std::str::FromStr>(key: &str, raw: Option<String>, default: T) -> Result<T, String> {
            match raw {
                None => Ok(default),
                Some(s) => s.trim().parse().map_err(|_| format!("{key}: cannot parse {s:?}")),
            }
        }
        let d = Self::default();
        let cfg = Self {
            port: parse("MOONLAB_PORT", get("MOONLAB_PORT"), d.port)?,
            sample_cap: parse("MOONLAB_SAMPLE_CAP", get("MOONLAB_SAMPLE_CAP"), d.sample_cap)?,
            threads: parse("MOONLAB_THREADS", get("MOONLAB_THREADS"), d.threads)?,
            max_jobs: parse("MOONLAB_MAX_JOBS", get("MOONLAB_MAX_JOBS"), d.max_jobs)?,
            static_dir: get("MOONLAB_STATIC_DIR").map(PathBuf::from).unwrap_or(d.static_dir),
        };
        if cfg.max_jobs == 0 {
            return Err("MOONLAB_MAX_JOBS must be at least 1".into());
        }
        Ok(cfg)
    }
}
