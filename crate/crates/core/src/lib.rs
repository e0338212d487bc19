pub mod attribute;
pub mod chemfeat;
pub mod corpus;
pub mod design;
pub mod forge;
pub mod fragment;
pub mod happy;
pub mod metrics;
pub mod molgraph;
