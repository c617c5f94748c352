#pragma once

#include "spinekit/alpha_shape.hpp"
#include "spinekit/delaunay.hpp"
#include "spinekit/error.hpp"
#include "spinekit/interspace.hpp"
#include "spinekit/kde.hpp"
#include "spinekit/kdtree.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/phantom.hpp"
#include "spinekit/ply.hpp"
#include "spinekit/predicates.hpp"
#include "spinekit/report.hpp"
#include "spinekit/roi.hpp"
#include "spinekit/segmentation.hpp"
#include "spinekit/texture.hpp"
#include "spinekit/vec3.hpp"
#include "spinekit/volume.hpp"
