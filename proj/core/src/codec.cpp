#include "jcas/codec.hpp"

// Header-only; this translation unit anchors the target.
