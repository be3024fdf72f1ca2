//! Opaque identifiers.
//!
//! Every entity id is a string newtype so that a block id can never be passed
//! where a code id is expected. Fresh ids come from the project's monotone
//! counter and are never reused.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(ProjectId);
id_type!(DataSourceId);
id_type!(DocumentId);
id_type!(TableId);
id_type!(
    /// Row identity inside one table. Assigned once at import, stable across views.
    RowId
);
id_type!(CodeId);
id_type!(AnnotationId);
id_type!(CellId);
id_type!(BlockId);
id_type!(LinkId);
id_type!(RegionId);
id_type!(
    /// Stable identity of a chart mark, see [`crate::notebook::chart::element_id`].
    ElementId
);
