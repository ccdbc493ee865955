pub mod cache;
pub mod certificate;
pub mod exactring;
pub mod g31;
pub mod koszul;
pub mod pipeline;
pub mod gradlin;
pub mod poly;
