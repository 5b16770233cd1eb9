//! Report layout shared by the subcommands: `#`-prefixed metadata lines
//! followed by one table.

use std::fmt::Display;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// `# key<TAB>value` metadata, then a tab-separated table.
    Tsv,
    /// `key = value` lines.
    Kv,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Report {
            meta: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Two-column `quantity<TAB>value` table.
    pub fn quantities() -> Self {
        Report::new(["quantity", "value"])
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    pub fn quantity(&mut self, name: &str, value: impl Display) -> &mut Self {
        self.row(vec![name.to_string(), value.to_string()])
    }

    pub fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match format {
            Format::Tsv => {
                for (k, v) in &self.meta {
                    s.push_str(&format!("# {k}\t{v}\n"));
                }
                s.push_str(&self.header.join("\t"));
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.join("\t"));
                    s.push('\n');
                }
            }
            Format::Kv => {
                for (k, v) in &self.meta {
                    s.push_str(&format!("{k} = {v}\n"));
                }
                for row in &self.rows {
                    if self.header.len() == 2 {
                        s.push_str(&format!("{} = {}\n", row[0], row[1]));
                    } else {
                        for (name, cell) in self.header.iter().zip(row).skip(1) {
                            s.push_str(&format!("{}.{name} = {cell}\n", row[0]));
                        }
                    }
                }
            }
        }
        s
    }
}
