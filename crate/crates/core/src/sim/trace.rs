use std::fmt::Write as _;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Canonical episode log, hashed incrementally and optionally kept as text.
#[derive(Debug, Clone)]
pub struct Trace {
    hash: u64,
    text: Option<String>,
    line: String,
}

impl Trace {
    pub fn new(keep_text: bool) -> Self {
        Self {
            hash: FNV_OFFSET,
            text: keep_text.then(String::new),
            line: String::new(),
        }
    }

    fn push_line(&mut self) {
        self.line.push('\n');
        for &b in self.line.as_bytes() {
            self.hash ^= u64::from(b);
            self.hash = self.hash.wrapping_mul(FNV_PRIME);
        }
        if let Some(t) = &mut self.text {
            t.push_str(&self.line);
        }
        self.line.clear();
    }

    /// `t=<s> action=<a,..> belief=<p,..> alive=<ugv/uav_a/uav_b>`
    pub fn decision(&mut self, t: f64, action: &[f64], belief: &[f64], alive: &str) {
        let _ = write!(self.line, "t={t} action={} belief={} alive={alive}", join(action), join(belief));
        self.push_line();
    }

    pub fn outcome(&mut self, t: f64, success: bool, rescue_time: f64, survival: f64) {
        let _ = write!(self.line, "end t={t} success={success} rescue={rescue_time} survival={survival}");
        self.push_line();
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn into_text(self) -> Option<String> {
        self.text
    }
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}
