pub mod lp_text;
