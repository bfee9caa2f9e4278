use crate::ingest::TaskRecord;

const SYSTEM_PROMPT: &str = include_str!("system_prompt.txt");

/// The annotation system prompt: scoring instructions, output schema and
/// the four taxonomies with their classification examples.
pub fn build_system_prompt() -> &'static str {
    SYSTEM_PROMPT
}

/// User message for one task: the occupation and the full task statement,
/// embedded as-is.
pub fn build_user_prompt(task: &TaskRecord) -> String {
    format!(
        "Occupation: {}\nTask: {}",
        task.occupation_title, task.task_text
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TaskType;

    fn task(title: &str, text: &str) -> TaskRecord {
        TaskRecord {
            task_id: "1".into(),
            onet_soc: "47-2221.00".parse().unwrap(),
            occupation_title: title.into(),
            task_text: text.into(),
            task_type: TaskType::Core,
        }
    }

    #[test]
    fn system_prompt_contents() {
        let p = build_system_prompt();
        assert!(p.contains(r#"Output JSON: {"PV": X, "DA": Y, "TK": Z, "AG": W}"#));
        for header in [
            "Performance Variance Taxonomy",
            "Data Abundance Taxonomy",
            "Tacit Knowledge Taxonomy",
            "Algorithmic Efficiency Gap Taxonomy",
        ] {
            assert!(p.contains(header), "{header}");
        }
        assert!(p.starts_with("Score each task 0, 1, or 2"));
        assert_eq!(build_system_prompt().as_bytes(), p.as_bytes());
    }

    #[test]
    fn user_prompt_embeds_task() {
        let t = task("Riggers", "Attach loads to rigging...");
        let p = build_user_prompt(&t);
        assert!(p.contains("Riggers"));
        assert!(p.contains("Attach loads to rigging..."));
        assert_eq!(p, build_user_prompt(&t));
    }

    #[test]
    fn quotes_are_not_escaped() {
        let t = task("Editors", r#"Review "final" drafts, 'as needed' \n"#);
        assert!(build_user_prompt(&t).contains(r#"Review "final" drafts, 'as needed' \n"#));
    }
}
