//! Listwise recruiter prompt.

use serde::{Deserialize, Serialize};

use super::RankRequest;

/// Mandatory-criteria checklist used when a request carries no instructions
/// of its own.
pub const DEFAULT_INSTRUCTIONS: &str = "\
Carefully verify that each candidate meets ALL of the following mandatory criteria when explicitly stated in the job description:
- Education: required degree level and relevant major.
- Certifications & Licenses: mandatory professional qualifications (e.g., physician's license, CPA).
- Technical Skills: required tools, languages and domain skills.
- Age: explicit age ranges or limits.
- Legal & Identity: work authorization, citizenship or background requirements.
- Physical Fitness: stated physical or health requirements.
- Work Conditions: location, travel, shifts or other working-condition constraints.
Critical Rule: The more explicitly stated mandatory criteria a candidate fails to meet, the less matching they are to the job.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

fn placeholder(i: usize) -> String {
    const NAMES: [&str; 4] = ["X", "Y", "Z", "T"];
    match NAMES.get(i) {
        Some(n) => n.to_string(),
        None => format!("X{}", i + 1),
    }
}

fn chain(k: usize, label: impl Fn(usize) -> String) -> String {
    (0..k)
        .map(|i| format!("[{}]", label(i)))
        .collect::<Vec<_>>()
        .join(" > ")
}

pub fn build_prompt(req: &RankRequest<'_>) -> Prompt {
    let k = req.k();
    let empty_chain = chain(k, |_| String::new());
    let example_chain = chain(k, placeholder);

    let system = format!(
        "You are an expert technical recruiter that can rank resumes based on their matching degree \
         to the job description. You first analyze each resume individually, then compare them \
         systematically, and finally provide the ranking. The most relevant resumes should be listed \
         first. The output format should be <answer> {empty_chain} </answer>, e.g., \
         <answer> {example_chain} </answer>."
    );

    let mut instructions = req
        .instructions
        .clone()
        .unwrap_or_else(|| DEFAULT_INSTRUCTIONS.to_string());
    if let Some(hint) = &req.hint {
        instructions.push_str("\nHint: ");
        instructions.push_str(hint);
    }

    let resumes = req
        .candidates
        .iter()
        .enumerate()
        .map(|(i, doc)| format!("Resume [{}]:\n{}", i + 1, doc.render()))
        .collect::<Vec<_>>()
        .join("\n\n");

    let user = format!(
        "{instructions}\n\n\
         Resumes:\n{resumes}\n\n\
         Please rank these resumes according to their matching degree to the JOB DESCRIPTION: [{job}].\n\n\
         Follow these steps exactly:\n\
         1. First, think to summarize the job description and analyze EACH resume briefly: Evaluate how well it matches the job description and mandatory criteria.\n\
         2. Then, think to COMPARE the resumes and determine which candidates are better fits and why.\n\
         3. Finally, within <answer> tags, provide ONLY the final ranking of the resumes from best to worst fit using their numerical identifiers in the format: {example_chain}.",
        job = req.job.render(),
    );

    Prompt { system, user }
}
