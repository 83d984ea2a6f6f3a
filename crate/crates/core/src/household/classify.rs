use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionClass {
    Sleep,
    Away,
    Home,
}

fn words(label: &str) -> Vec<String> {
    label
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn at_home(words: &[String]) -> bool {
    words
        .windows(2)
        .any(|w| (w[0] == "from" || w[0] == "at") && w[1] == "home")
}

const SCHOOL_OR_WORK: &[&str] = &["school", "work", "working", "office"];

/// Keyword classification of an action label. Words are compared
/// case-insensitively, so "Homework" is not work and "At-school" is away.
pub fn classify_action(label: &str) -> ActionClass {
    let w = words(label);
    if w.iter().any(|x| x.contains("sleep")) {
        return ActionClass::Sleep;
    }
    if at_home(&w) {
        return ActionClass::Home;
    }
    let away = w
        .iter()
        .any(|x| x.starts_with("commut") || x == "outside" || SCHOOL_OR_WORK.contains(&x.as_str()));
    if away {
        ActionClass::Away
    } else {
        ActionClass::Home
    }
}

/// Away actions that cannot happen on a weekend: being at school or work.
pub fn is_school_or_work(label: &str) -> bool {
    let w = words(label);
    classify_action(label) == ActionClass::Away && w.iter().any(|x| SCHOOL_OR_WORK.contains(&x.as_str()))
}
