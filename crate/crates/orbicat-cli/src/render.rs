use serde_json::Value;

pub fn json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        // complex numbers arrive as [re, im]
        Value::Array(a) if a.len() == 2 && a.iter().all(|x| x.is_f64()) => {
            let (re, im) = (a[0].as_f64().unwrap_or(0.0), a[1].as_f64().unwrap_or(0.0));
            if im.abs() < 1e-12 {
                format!("{re:.6}")
            } else {
                format!("{re:.6}{im:+.6}i")
            }
        }
        other => other.to_string(),
    }
}

fn grid(out: &mut String, head: &[String], rows: &[Vec<String>]) {
    let mut w: Vec<usize> = head.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (k, c) in r.iter().enumerate() {
            w[k] = w[k].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| -> String {
        let parts: Vec<String> = cells.iter().zip(&w).map(|(c, &n)| format!("{c:<n$}")).collect();
        format!("  {}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(head));
    out.push_str(&line(&w.iter().map(|&n| "-".repeat(n)).collect::<Vec<_>>()));
    for r in rows {
        out.push_str(&line(r));
    }
}

fn checks_table(out: &mut String, title: &str, rep: &Value) {
    let Some(checks) = rep.get("checks").and_then(Value::as_object) else { return };
    out.push_str(&format!("{title}\n"));
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(k, c)| {
            let pass = c.get("pass").and_then(Value::as_bool).unwrap_or(false);
            vec![k.clone(), cell(&c["residual"]), if pass { "pass".into() } else { "FAIL".into() }]
        })
        .collect();
    grid(out, &["check".into(), "residual".into(), "status".into()], &rows);
}

fn modular_table(out: &mut String, title: &str, md: &Value) {
    let (Some(labels), Some(q), Some(t)) = (md["labels"].as_array(), md["qdim"].as_array(), md["tdiag"].as_array()) else {
        return;
    };
    out.push_str(&format!("{title} (global dim {})\n", cell(&md["global_dim"])));
    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(q)
        .zip(t)
        .map(|((l, q), t)| vec![cell(l), cell(q), cell(t)])
        .collect();
    grid(out, &["label".into(), "qdim".into(), "theta".into()], &rows);
}

fn records_table(out: &mut String, title: &str, rows: &[Value]) {
    let Some(first) = rows.first().and_then(Value::as_object) else { return };
    let head: Vec<String> = first.keys().cloned().collect();
    out.push_str(&format!("{title}\n"));
    let body: Vec<Vec<String>> = rows.iter().map(|r| head.iter().map(|k| cell(&r[k])).collect()).collect();
    grid(out, &head, &body);
}

fn section(out: &mut String, prefix: &str, v: &Value) {
    let Some(obj) = v.as_object() else { return };
    for (k, x) in obj {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match x {
            Value::Object(_) if x.get("checks").is_some() => checks_table(out, &name, x),
            Value::Object(_) if x.get("smatrix").is_some() => modular_table(out, &name, x),
            Value::Object(_) => section(out, &name, x),
            Value::Array(a) if a.first().is_some_and(Value::is_object) => records_table(out, &name, a),
            _ => out.push_str(&format!("{name}: {}\n", cell(x))),
        }
    }
}

/// Aligned text rendering of a report.
pub fn table(v: &Value) -> String {
    let mut out = String::new();
    section(&mut out, "", v);
    out
}
