use serde::{Deserialize, Serialize};

pub const SYSTEM_PROMPT: &str = "You are an intelligent robotic arm.";

/// Fragments are concatenated without separators beyond their own trailing
/// spaces, exactly as the string literals join in the reference client.
pub const USER_PROMPT: &str = concat!(
    "Do you spot a clothing item on the table? ",
    "If yes: Classify them in the classes: ",
    "shirt, sock, underwear or trousers. ",
    "Do you see something else instead? respond with other. ",
    "Is the table empty? respond with empty. ",
    "Your response is a single word - either ",
    "shirt, sock, underwear, trousers, other or empty",
);

/// One chat call: a system message and one user message carrying images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_name: String,
    pub system_prompt: String,
    pub user_prompt: String,
    /// PNG bytes; base64-encoded only on the wire.
    #[serde(skip)]
    pub images: Vec<Vec<u8>>,
}

/// The fixed classification prompt, without images attached.
pub fn build_prompt(model_name: &str) -> ChatRequest {
    ChatRequest {
        model_name: model_name.to_string(),
        system_prompt: SYSTEM_PROMPT.to_string(),
        user_prompt: USER_PROMPT.to_string(),
        images: Vec::new(),
    }
}

impl ChatRequest {
    pub fn with_image(mut self, png: Vec<u8>) -> Self {
        self.images.push(png);
        self
    }
}
