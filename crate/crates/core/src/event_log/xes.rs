//! XES (IEEE 1849-2016) reading and writing, flat profile.
//!
//! Supported: `log > trace > event` with scalar attribute elements (`string`, `date`,
//! `int`, `float`, `boolean`, `id`). `extension`, `global` and `classifier` declarations
//! are accepted and skipped. Unknown elements carrying `key` and `value` are kept as
//! string attributes; `list`, `container` and nested meta-attributes are rejected.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::{AttributeValue, Attributes, Event, EventLog, LogError, Trace};

const CONCEPT_NAME: &str = "concept:name";
const TIME_TIMESTAMP: &str = "time:timestamp";

/// Parses an instant as written in XES files (RFC 3339, with a few common relaxations).
/// Values without an offset are read as UTC.
pub(crate) fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%dT%H:%M:%S%.f%z"] {
        if let Ok(t) = DateTime::parse_from_str(s, fmt) {
            return Some(t.with_timezone(&Utc));
        }
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    None
}

fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "INF" } else { "-INF" }.to_owned()
    } else {
        x.to_string()
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s.trim() {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

fn line_col(input: &[u8], pos: usize) -> (usize, usize) {
    let prefix = &input[..pos.min(input.len())];
    let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
    let line_start = prefix.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let column = String::from_utf8_lossy(&prefix[line_start..]).chars().count() + 1;
    (line, column)
}

struct PendingEvent {
    activity: Option<String>,
    timestamp: Option<DateTime<Utc>>,
    attributes: Attributes,
}

struct PendingTrace {
    index: usize,
    case_id: Option<String>,
    attributes: Attributes,
    events: Vec<PendingEvent>,
}

impl PendingTrace {
    fn finish(self) -> Result<Trace, LogError> {
        let case_id = self.case_id.ok_or(LogError::MissingCaseId {
            trace_index: self.index,
        })?;
        let mut events = Vec::with_capacity(self.events.len());
        for (event_index, pending) in self.events.into_iter().enumerate() {
            let missing = |field| LogError::MissingEventField {
                case: case_id.clone(),
                event_index,
                field,
            };
            let activity = pending
                .activity
                .filter(|a| !a.is_empty())
                .ok_or_else(|| missing(CONCEPT_NAME))?;
            let timestamp = pending.timestamp.ok_or_else(|| missing(TIME_TIMESTAMP))?;
            events.push(Event::new(activity, timestamp, pending.attributes)?);
        }
        Trace::new(case_id, self.attributes, events)
    }
}

enum Owner {
    Log,
    Trace,
    Event,
}

struct XesParser<'a> {
    input: &'a [u8],
    name: String,
    traces: Vec<Trace>,
    trace: Option<PendingTrace>,
    event: Option<PendingEvent>,
    trace_count: usize,
    seen_log: bool,
}

impl<'a> XesParser<'a> {
    fn position_error(&self, element: &str, pos: usize, reason: &str) -> LogError {
        let (line, column) = line_col(self.input, pos);
        LogError::Unsupported {
            element: element.to_owned(),
            line,
            column,
            reason: reason.to_owned(),
        }
    }

    fn xml_error(&self, pos: usize, message: String) -> LogError {
        let (line, column) = line_col(self.input, pos);
        LogError::Xml {
            line,
            column,
            message,
        }
    }

    fn owner(&self) -> Owner {
        if self.event.is_some() {
            Owner::Event
        } else if self.trace.is_some() {
            Owner::Trace
        } else {
            Owner::Log
        }
    }

    fn key_value(&self, start: &BytesStart<'_>, pos: usize) -> Result<(Option<String>, Option<String>), LogError> {
        let mut key = None;
        let mut value = None;
        for attr in start.attributes() {
            let attr = attr.map_err(|e| self.xml_error(pos, e.to_string()))?;
            let text = attr
                .unescape_value()
                .map_err(|e| self.xml_error(pos, e.to_string()))?
                .into_owned();
            match attr.key.as_ref() {
                b"key" => key = Some(text),
                b"value" => value = Some(text),
                _ => {}
            }
        }
        Ok((key, value))
    }

    /// Handles a scalar attribute element.
    fn attribute(&mut self, tag: &str, start: &BytesStart<'_>, pos: usize) -> Result<(), LogError> {
        let (key, value) = self.key_value(start, pos)?;
        let Some(key) = key else {
            return Err(self.position_error(tag, pos, "attribute element without `key`"));
        };
        let raw = value.unwrap_or_default();
        let invalid = |kind| LogError::InvalidAttribute {
            key: key.clone(),
            kind,
            value: raw.clone(),
        };
        let value = match tag {
            "string" | "id" => AttributeValue::String(raw.clone()),
            "date" => AttributeValue::Instant(parse_timestamp(&raw).ok_or_else(|| invalid("date"))?),
            "int" => AttributeValue::Int(raw.trim().parse().map_err(|_| invalid("int"))?),
            "float" => AttributeValue::Float(parse_float(&raw).ok_or_else(|| invalid("float"))?),
            "boolean" => AttributeValue::Boolean(match raw.trim() {
                "true" | "1" => true,
                "false" | "0" => false,
                _ => return Err(invalid("boolean")),
            }),
            _ => AttributeValue::String(raw.clone()),
        };
        match self.owner() {
            Owner::Event => {
                let event = self.event.as_mut().expect("event owner");
                match key.as_str() {
                    CONCEPT_NAME => event.activity = Some(value.to_string()),
                    TIME_TIMESTAMP => {
                        let ts = match &value {
                            AttributeValue::Instant(t) => *t,
                            other => parse_timestamp(&other.to_string())
                                .ok_or_else(|| invalid("date"))?,
                        };
                        event.timestamp = Some(ts);
                    }
                    _ => {
                        event.attributes.insert(key, value);
                    }
                }
            }
            Owner::Trace => {
                let trace = self.trace.as_mut().expect("trace owner");
                if key == CONCEPT_NAME {
                    trace.case_id = Some(value.to_string());
                } else {
                    trace.attributes.insert(key, value);
                }
            }
            Owner::Log => {
                if key == CONCEPT_NAME {
                    self.name = value.to_string();
                }
            }
        }
        Ok(())
    }

    fn run(mut self) -> Result<EventLog, LogError> {
        let mut reader = Reader::from_reader(self.input);
        reader.config_mut().trim_text(true);
        let mut depth = 0usize;
        // Depth at which a skipped subtree (global, extension, ...) started.
        let mut skip_until: Option<usize> = None;

        loop {
            let pos = reader.buffer_position() as usize;
            let event = match reader.read_event() {
                Ok(ev) => ev,
                Err(e) => {
                    let err_pos = reader.error_position() as usize;
                    return Err(self.xml_error(err_pos, e.to_string()));
                }
            };
            match event {
                XmlEvent::Start(start) => {
                    depth += 1;
                    if skip_until.is_some() {
                        continue;
                    }
                    let tag = String::from_utf8_lossy(start.local_name().as_ref()).into_owned();
                    self.open(&tag, &start, pos, depth, &mut skip_until, false)?;
                }
                XmlEvent::Empty(start) => {
                    if skip_until.is_some() {
                        continue;
                    }
                    let tag = String::from_utf8_lossy(start.local_name().as_ref()).into_owned();
                    self.open(&tag, &start, pos, depth + 1, &mut skip_until, true)?;
                }
                XmlEvent::End(end) => {
                    if skip_until == Some(depth) {
                        skip_until = None;
                    } else if skip_until.is_none() {
                        let tag = String::from_utf8_lossy(end.local_name().as_ref()).into_owned();
                        self.close(&tag)?;
                    }
                    depth -= 1;
                }
                XmlEvent::Eof => {
                    if depth > 0 {
                        return Err(self.xml_error(pos, "unexpected end of document".into()));
                    }
                    break;
                }
                _ => {}
            }
        }
        if !self.seen_log {
            return Err(self.xml_error(0, "document has no <log> root element".into()));
        }
        EventLog::new(self.name, self.traces)
    }

    fn open(
        &mut self,
        tag: &str,
        start: &BytesStart<'_>,
        pos: usize,
        depth: usize,
        skip_until: &mut Option<usize>,
        empty: bool,
    ) -> Result<(), LogError> {
        match tag {
            "log" => {
                if depth != 1 {
                    return Err(self.position_error(tag, pos, "<log> must be the root element"));
                }
                self.seen_log = true;
            }
            _ if !self.seen_log => {
                return Err(self.position_error(tag, pos, "expected <log> root element"));
            }
            "extension" | "global" | "classifier" => {
                if !empty {
                    *skip_until = Some(depth);
                }
            }
            "trace" => {
                if self.trace.is_some() {
                    return Err(self.position_error(tag, pos, "nested trace"));
                }
                let pending = PendingTrace {
                    index: self.trace_count,
                    case_id: None,
                    attributes: Attributes::new(),
                    events: Vec::new(),
                };
                self.trace_count += 1;
                self.trace = Some(pending);
                if empty {
                    self.close(tag)?;
                }
            }
            "event" => {
                if self.trace.is_none() {
                    return Err(self.position_error(tag, pos, "events must be nested in a trace"));
                }
                if self.event.is_some() {
                    return Err(self.position_error(tag, pos, "nested event"));
                }
                self.event = Some(PendingEvent {
                    activity: None,
                    timestamp: None,
                    attributes: Attributes::new(),
                });
                if empty {
                    self.close(tag)?;
                }
            }
            "list" | "container" => {
                return Err(self.position_error(tag, pos, "nested attribute collections are not supported"));
            }
            _ => {
                if !empty {
                    return Err(self.position_error(tag, pos, "nested meta-attributes are not supported"));
                }
                let scalar = matches!(tag, "string" | "date" | "int" | "float" | "boolean" | "id");
                if !scalar {
                    let (key, value) = self.key_value(start, pos)?;
                    if key.is_none() || value.is_none() {
                        return Err(self.position_error(tag, pos, "unknown element"));
                    }
                }
                self.attribute(tag, start, pos)?;
            }
        }
        Ok(())
    }

    fn close(&mut self, tag: &str) -> Result<(), LogError> {
        match tag {
            "event" => {
                if let (Some(event), Some(trace)) = (self.event.take(), self.trace.as_mut()) {
                    trace.events.push(event);
                }
            }
            "trace" => {
                if let Some(trace) = self.trace.take() {
                    self.traces.push(trace.finish()?);
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Parses an XES document into an [`EventLog`].
pub fn parse_xes(mut input: impl Read) -> Result<EventLog, LogError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    XesParser {
        input: &bytes,
        name: String::new(),
        traces: Vec::new(),
        trace: None,
        event: None,
        trace_count: 0,
        seen_log: false,
    }
    .run()
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn write_attribute(out: &mut String, indent: &str, key: &str, value: &AttributeValue) {
    let (tag, text) = match value {
        AttributeValue::String(s) => ("string", s.clone()),
        AttributeValue::Int(i) => ("int", i.to_string()),
        AttributeValue::Float(x) => ("float", format_float(*x)),
        AttributeValue::Boolean(b) => ("boolean", b.to_string()),
        AttributeValue::Instant(t) => ("date", format_timestamp(t)),
    };
    out.push_str(&format!(
        "{indent}<{tag} key=\"{}\" value=\"{}\"/>\n",
        escape_attr(key),
        escape_attr(&text)
    ));
}

/// Serializes a log as XES. Attribute keys `concept:name` and `time:timestamp` inside
/// attribute maps are skipped because the dedicated fields own them.
pub fn write_xes(log: &EventLog, mut out: impl Write) -> std::io::Result<()> {
    let mut doc = String::new();
    doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    doc.push_str("<log xes.version=\"1849-2016\" xes.features=\"\" xmlns=\"http://www.xes-standard.org/\">\n");
    doc.push_str("  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n");
    doc.push_str("  <extension name=\"Time\" prefix=\"time\" uri=\"http://www.xes-standard.org/time.xesext\"/>\n");
    if !log.name().is_empty() {
        write_attribute(&mut doc, "  ", CONCEPT_NAME, &log.name().into());
    }
    for trace in log.traces() {
        doc.push_str("  <trace>\n");
        write_attribute(&mut doc, "    ", CONCEPT_NAME, &trace.case_id().into());
        for (key, value) in trace.attributes() {
            if key != CONCEPT_NAME {
                write_attribute(&mut doc, "    ", key, value);
            }
        }
        for event in trace.events() {
            doc.push_str("    <event>\n");
            write_attribute(&mut doc, "      ", CONCEPT_NAME, &event.activity().into());
            write_attribute(&mut doc, "      ", TIME_TIMESTAMP, &event.timestamp().into());
            for (key, value) in event.attributes() {
                if key != CONCEPT_NAME && key != TIME_TIMESTAMP {
                    write_attribute(&mut doc, "      ", key, value);
                }
            }
            doc.push_str("    </event>\n");
        }
        doc.push_str("  </trace>\n");
    }
    doc.push_str("</log>\n");
    out.write_all(doc.as_bytes())
}

/// Convenience wrapper returning the XES document as a string.
pub fn xes_string(log: &EventLog) -> String {
    let mut buf = Vec::new();
    write_xes(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("XES output is UTF-8")
}
