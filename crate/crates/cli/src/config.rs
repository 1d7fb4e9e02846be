use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::{CliError, Result};

/// Keys accepted in each section and the flag each one sets.
const SECTIONS: &[(&str, &[(&str, &str)])] = &[
    (
        "model",
        &[
            ("kind", "model"),
            ("d", "d"),
            ("gamma", "gamma"),
            ("c", "c"),
            ("doping_k", "doping-k"),
            ("doping_m", "doping-m"),
            ("doping_x0", "doping-x0"),
            ("p0", "p0"),
            ("e0", "e0"),
            ("window", "window"),
            ("transform", "transform"),
            ("involution", "involution"),
            ("a", "a"),
            ("omega", "omega"),
            ("interval", "interval"),
        ],
    ),
    ("start", &[("x0", "x0"), ("state", "state"), ("y0", "y0")]),
    (
        "integrator",
        &[
            ("rtol", "rtol"),
            ("atol", "atol"),
            ("h_init", "h-init"),
            ("h_min", "h-min"),
            ("max_steps", "max-steps"),
            ("t_max", "t-max"),
        ],
    ),
    (
        "profile",
        &[
            ("kind", "profile"),
            ("amplitude", "amplitude"),
            ("seeds", "seeds"),
            ("nx", "nx"),
        ],
    ),
    (
        "analysis",
        &[
            ("run", ""),
            ("h", "h"),
            ("tol_iso", "tol-iso"),
            ("samples", "samples"),
            ("z", "z"),
            ("half_width", "half-width"),
            ("tol", "tol"),
            ("times", "times"),
            ("input", "input"),
        ],
    ),
    ("output", &[("out", "out")]),
];

/// Parsed config: the analysis to run, if named, and `(flag, value)` pairs
/// in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub run: Option<String>,
    pub flags: Vec<(String, String)>,
}

pub fn parse_config(text: &str, origin: &Path) -> Result<ConfigFile> {
    let err =
        |line: usize, msg: String| CliError::usage(format!("{}:{line}: {msg}", origin.display()));
    let mut out = ConfigFile::default();
    let mut section: Option<&(&str, &[(&str, &str)])> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, format!("malformed section header `{line}`")))?
                .trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| err(line_no, format!("unknown section `[{name}]`")))?,
            );
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected key = value, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let (sname, keys) =
            section.ok_or_else(|| err(line_no, format!("`{key}` appears before any section")))?;
        let flag = keys
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, f)| *f)
            .ok_or_else(|| err(line_no, format!("unknown key `{key}` in [{sname}]")))?;
        if value.is_empty() {
            return Err(err(line_no, format!("empty value for `{key}`")));
        }
        if flag.is_empty() {
            out.run = Some(value.to_string());
        } else if flag == "out" {
            for path in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                out.flags.push((flag.to_string(), path.to_string()));
            }
        } else {
            out.flags.push((flag.to_string(), value.to_string()));
        }
    }
    Ok(out)
}

/// Pulls `--config FILE` out of `argv` and, when present, splices the file's
/// flags in front of the user's flags.
pub fn expand_argv(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    let bin = it.next().unwrap_or_else(|| "isochrone".into());
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            config = Some(
                it.next()
                    .ok_or_else(|| CliError::usage("--config needs a file"))?,
            );
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.into());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        let mut full = vec![bin];
        full.extend(rest);
        return Ok(full);
    };
    let path = Path::new(&path).to_path_buf();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let cfg = parse_config(&text, &path)?;

    let cli = Cli::command();
    let is_subcommand = |a: &OsString| cli.find_subcommand(a.to_string_lossy().as_ref()).is_some();
    let (sub, user_flags): (OsString, Vec<OsString>) = match rest.first() {
        Some(first) if is_subcommand(first) => (first.clone(), rest[1..].to_vec()),
        _ => match &cfg.run {
            Some(run) => (run.into(), rest),
            None => {
                return Err(CliError::usage(
                    "no analysis given on the command line or in [analysis] run",
                ))
            }
        },
    };
    let sub_cmd = cli
        .find_subcommand(sub.to_string_lossy().as_ref())
        .ok_or_else(|| CliError::usage(format!("unknown analysis `{}`", sub.to_string_lossy())))?;
    let accepts = |flag: &str| sub_cmd.get_arguments().any(|a| a.get_long() == Some(flag));

    let mut full = vec![bin, sub];
    for (flag, value) in &cfg.flags {
        // Shared configs may carry settings for other analyses.
        if accepts(flag) {
            full.push(format!("--{flag}={value}").into());
        }
    }
    full.extend(user_flags);
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "# run\n[analysis]\nrun = period-map\nh = 0.05:0.3:6\n\n[model]\nkind = plasma\nd = 4\n[output]\nout = a.csv, b.json\n";
        let cfg = parse_config(text, Path::new("t.cfg")).unwrap();
        assert_eq!(cfg.run.as_deref(), Some("period-map"));
        let flags: Vec<_> = cfg.flags.iter().map(|(f, v)| format!("{f}={v}")).collect();
        assert_eq!(
            flags,
            [
                "h=0.05:0.3:6",
                "model=plasma",
                "d=4",
                "out=a.csv",
                "out=b.json"
            ]
        );
    }

    #[test]
    fn rejects_unknown_keys_and_orphans() {
        assert!(parse_config("[model]\ncolour = red\n", Path::new("t")).is_err());
        assert!(parse_config("d = 4\n", Path::new("t")).is_err());
        assert!(parse_config("[nowhere]\n", Path::new("t")).is_err());
        assert!(parse_config("[model]\nd\n", Path::new("t")).is_err());
    }

    #[test]
    fn every_mapped_flag_exists() {
        let cli = Cli::command();
        for (_, keys) in SECTIONS {
            for (_, flag) in *keys {
                if flag.is_empty() {
                    continue;
                }
                let known = cli
                    .get_subcommands()
                    .any(|s| s.get_arguments().any(|a| a.get_long() == Some(*flag)));
                assert!(known, "--{flag}");
            }
        }
    }
}
