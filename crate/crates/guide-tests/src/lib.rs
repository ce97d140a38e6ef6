//! Each module embeds one book chapter as its documentation, so every code
//! block in the book is compiled and run by `cargo test`. Chapters are
//! registered here as the book grows.
