use std::io::{self, BufRead, Read};

/// First line of every CSV this crate writes.
pub(crate) fn schema_comment(kind: &str) -> String {
    format!("# crowdflock {} {}", kind, crate::SCHEMA_VERSION)
}

/// CSV reader over data that may start with `#` comment lines and a header row.
pub(crate) fn csv_reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(rdr)
}

/// Collects the leading `#` lines of a buffered stream without consuming data rows.
pub(crate) fn leading_comments<R: BufRead>(rdr: &mut R) -> io::Result<Vec<String>> {
    let mut out = Vec::new();
    loop {
        let buf = rdr.fill_buf()?;
        if buf.first() != Some(&b'#') {
            return Ok(out);
        }
        let mut line = String::new();
        rdr.read_line(&mut line)?;
        out.push(line.trim_end().to_string());
    }
}

/// Parses `key=value` tokens out of a schema comment line.
pub(crate) fn comment_value<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|line| {
        line.split_whitespace().find_map(|tok| {
            let (k, v) = tok.split_once('=')?;
            (k == key).then_some(v)
        })
    })
}
