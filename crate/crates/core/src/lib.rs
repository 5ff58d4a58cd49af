pub mod balance;
pub mod f2;
pub mod group;
pub mod lp;
pub mod measure;
pub mod pictures;
pub mod rational;
pub mod sets;
pub mod ramsey;
pub mod folner;
