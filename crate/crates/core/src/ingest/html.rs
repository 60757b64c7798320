//! Tag-soup tolerant HTML scanner: visible text blocks, the body tag
//! signature, and outgoing links.

/// Elements whose text is never visible. Their tags stay out of the signature.
const HIDDEN: &[&str] = &["script", "style", "noscript", "template"];

/// Navigation chrome: text dropped, tags kept in the signature.
const BOILERPLATE: &[&str] = &["nav", "footer", "aside"];

const BLOCK: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "center", "dd", "div", "dl", "dt", "figcaption", "figure",
    "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "html", "li", "main", "nav", "ol", "option",
    "p", "pre", "section", "table", "td", "th", "title", "tr", "ul",
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractedHtml {
    pub text_blocks: Vec<String>,
    pub tag_signature: Vec<String>,
    /// Raw `href` values of anchors, in document order, entities decoded.
    pub links: Vec<String>,
}

/// Visible text blocks and the tag signature of a page.
pub fn extract_text(html: &[u8]) -> (Vec<String>, Vec<String>) {
    let e = scan(html);
    (e.text_blocks, e.tag_signature)
}

#[derive(Default)]
struct Scanner {
    out: ExtractedHtml,
    pending: String,
    in_head: bool,
    boilerplate: usize,
}

impl Scanner {
    fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let decoded = decode_entities(&self.pending);
        self.pending.clear();
        let block = decoded.split_whitespace().collect::<Vec<_>>().join(" ");
        if !block.is_empty() {
            self.out.text_blocks.push(block);
        }
    }

    fn text(&mut self, text: &str) {
        if !self.in_head && self.boilerplate == 0 {
            self.pending.push_str(text);
        }
    }

    fn start_tag(&mut self, name: &str, attrs: &str) {
        if name == "head" {
            self.flush();
            self.in_head = true;
            return;
        }
        if name == "body" || name == "html" {
            self.in_head = false;
        }
        if self.in_head {
            return;
        }
        if BLOCK.contains(&name) {
            self.flush();
        }
        self.out.tag_signature.push(name.to_string());
        if BOILERPLATE.contains(&name) {
            self.boilerplate += 1;
        }
        if name == "a" {
            if let Some(href) = attribute(attrs, "href") {
                self.out.links.push(decode_entities(&href));
            }
        }
    }

    fn end_tag(&mut self, name: &str) {
        if name == "head" {
            self.in_head = false;
            return;
        }
        if self.in_head {
            return;
        }
        if BLOCK.contains(&name) {
            self.flush();
        }
        if BOILERPLATE.contains(&name) {
            self.boilerplate = self.boilerplate.saturating_sub(1);
        }
    }
}

/// Scans a page. Malformed markup never fails; at worst blocks come out empty.
pub fn scan(html: &[u8]) -> ExtractedHtml {
    let doc = String::from_utf8_lossy(html);
    let src = doc.as_ref();
    let bytes = src.as_bytes();
    let mut sc = Scanner::default();
    let mut pos = 0;
    while pos < bytes.len() {
        let Some(rel) = src[pos..].find('<') else {
            sc.text(&src[pos..]);
            break;
        };
        let lt = pos + rel;
        sc.text(&src[pos..lt]);
        let rest = &src[lt..];
        if rest.starts_with("<!--") {
            pos = match rest[4..].find("-->") {
                Some(end) => lt + 4 + end + 3,
                None => bytes.len(),
            };
            continue;
        }
        let next = rest[1..].chars().next();
        match next {
            Some('!') | Some('?') => {
                pos = skip_to_gt(src, lt + 1);
            }
            Some('/') => {
                let (name, _, end) = read_tag(src, lt + 2);
                if !name.is_empty() {
                    sc.end_tag(&name);
                }
                pos = end;
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let (name, attrs, end) = read_tag(src, lt + 1);
                pos = end;
                if HIDDEN.contains(&name.as_str()) {
                    let self_closing = attrs.trim_end().ends_with('/');
                    if !self_closing {
                        pos = skip_raw_text(src, pos, &name);
                    }
                    continue;
                }
                sc.start_tag(&name, &attrs);
            }
            _ => {
                // A lone '<' is text.
                sc.text("<");
                pos = lt + 1;
            }
        }
    }
    sc.flush();
    sc.out
}

fn skip_to_gt(src: &str, from: usize) -> usize {
    match src[from..].find('>') {
        Some(i) => from + i + 1,
        None => src.len(),
    }
}

/// Reads `name attrs... >` starting right after `<` (or `</`). Quoted
/// attribute values may contain `>`.
fn read_tag(src: &str, from: usize) -> (String, String, usize) {
    let bytes = src.as_bytes();
    let mut i = from;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-' || bytes[i] == b':') {
        i += 1;
    }
    let name = src[from..i].to_ascii_lowercase();
    let attr_start = i;
    let mut quote: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => break,
            None => {}
        }
        i += 1;
    }
    let attrs = src[attr_start..i].to_string();
    (name, attrs, (i + 1).min(src.len()))
}

/// Skips the content of a raw-text element up to and including its end tag.
fn skip_raw_text(src: &str, from: usize, name: &str) -> usize {
    let closing = format!("</{name}");
    let lower = src[from..].to_ascii_lowercase();
    match lower.find(&closing) {
        Some(i) => skip_to_gt(src, from + i),
        None => src.len(),
    }
}

fn attribute(attrs: &str, wanted: &str) -> Option<String> {
    let bytes = attrs.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'=' && bytes[i] != b'/' {
            i += 1;
        }
        let name = attrs[start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let q = bytes[i];
                let vs = i + 1;
                i = vs;
                while i < bytes.len() && bytes[i] != q {
                    i += 1;
                }
                value = attrs[vs..i].to_string();
                i += 1;
            } else {
                let vs = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                value = attrs[vs..i].to_string();
            }
        }
        if name == wanted {
            return Some(value);
        }
        if start == i {
            i += 1;
        }
    }
    None
}

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "hellip" => '…',
        "mdash" => '—',
        "ndash" => '–',
        "lsquo" => '‘',
        "rsquo" => '’',
        "ldquo" => '“',
        "rdquo" => '”',
        "laquo" => '«',
        "raquo" => '»',
        "euro" => '€',
        "pound" => '£',
        "deg" => '°',
        "middot" => '·',
        "aacute" => 'á',
        "agrave" => 'à',
        "acirc" => 'â',
        "auml" => 'ä',
        "aring" => 'å',
        "ccedil" => 'ç',
        "eacute" => 'é',
        "egrave" => 'è',
        "ecirc" => 'ê',
        "euml" => 'ë',
        "iacute" => 'í',
        "icirc" => 'î',
        "iuml" => 'ï',
        "ntilde" => 'ñ',
        "oacute" => 'ó',
        "ocirc" => 'ô',
        "ouml" => 'ö',
        "uacute" => 'ú',
        "ucirc" => 'û',
        "ugrave" => 'ù',
        "uuml" => 'ü',
        "szlig" => 'ß',
        "Aacute" => 'Á',
        "Agrave" => 'À',
        "Auml" => 'Ä',
        "Ccedil" => 'Ç',
        "Eacute" => 'É',
        "Egrave" => 'È',
        "Ouml" => 'Ö',
        "Uuml" => 'Ü',
        _ => return None,
    })
}

/// Decodes named and numeric character references. Unknown references are
/// left as written.
pub fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp + 1..];
        let decoded = tail.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let body = &tail[..semi];
            let c = if let Some(num) = body.strip_prefix('#') {
                let code = match num.strip_prefix(['x', 'X']) {
                    Some(hex) => u32::from_str_radix(hex, 16).ok(),
                    None => num.parse::<u32>().ok(),
                };
                code.and_then(char::from_u32)
            } else {
                named_entity(body)
            };
            c.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &tail[semi + 1..];
            }
            None => {
                out.push('&');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn minimal_page() {
        let (blocks, signature) = extract_text(b"<html><body><p>Hello</p></body></html>");
        assert_eq!(blocks, ["Hello"]);
        assert_eq!(signature, sig(&["html", "body", "p"]));
    }

    #[test]
    fn script_is_dropped() {
        let (blocks, signature) = extract_text(b"<script>var x=1; if (a<b) {}</script><p>Hi</p>");
        assert_eq!(blocks, ["Hi"]);
        assert_eq!(signature, sig(&["p"]));
    }

    #[test]
    fn entities_decode() {
        assert_eq!(extract_text(b"<p>a&amp;b</p>").0, ["a&b"]);
        assert_eq!(decode_entities("&#233;t&#xE9; &bogus; & &lt;"), "été &bogus; & <");
    }

    #[test]
    fn head_style_and_comments_hidden() {
        let html = br#"<!DOCTYPE html><html><head><title>T</title><style>p{color:red}</style></head>
            <body><!-- <p>gone</p> --><div>One <b>bold</b> word<br>Two</div><STYLE>x</STYLE></body></html>"#;
        let (blocks, signature) = extract_text(html);
        assert_eq!(blocks, ["One bold word", "Two"]);
        assert_eq!(signature, sig(&["html", "body", "div", "b", "br"]));
    }

    #[test]
    fn boilerplate_text_dropped_but_tags_kept() {
        let e = scan(br#"<body><nav><a href="/a">Menu</a></nav><p>Body text</p><footer>(c)</footer></body>"#);
        assert_eq!(e.text_blocks, ["Body text"]);
        assert_eq!(e.tag_signature, sig(&["body", "nav", "a", "p", "footer"]));
        assert_eq!(e.links, ["/a"]);
    }

    #[test]
    fn tag_soup_tolerated() {
        let e = scan(b"<p>unclosed <i>italic<p>next 1 < 2 <a href='x?a=1&amp;b=2' title=\"a>b\">link</a");
        assert_eq!(e.text_blocks, ["unclosed italic", "next 1 < 2 link"]);
        assert_eq!(e.links, ["x?a=1&b=2"]);
    }

    #[test]
    fn nbsp_is_whitespace() {
        assert_eq!(extract_text(b"<p>a&nbsp;&nbsp; b</p>").0, ["a b"]);
    }

    proptest! {
        #[test]
        fn blocks_never_contain_well_formed_tags(
            parts in proptest::collection::vec(prop_oneof![
                "[a-zA-Z ,.]{0,12}",
                Just("<p>".to_string()), Just("</p>".to_string()), Just("<div class=\"x\">".to_string()),
                Just("<b>".to_string()), Just("</b>".to_string()), Just("<br/>".to_string()),
                Just("<script>a</script>".to_string()), Just("&amp;".to_string()),
            ], 0..30)
        ) {
            let html = parts.concat();
            let (blocks, _) = extract_text(html.as_bytes());
            for b in blocks {
                prop_assert!(!b.contains('<'), "{b:?} from {html:?}");
                prop_assert!(!b.is_empty());
            }
        }

        #[test]
        fn arbitrary_bytes_do_not_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = scan(&bytes);
        }
    }
}
