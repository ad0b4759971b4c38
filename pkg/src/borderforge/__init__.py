"""Laser-pointer teaching of virtual borders to a simulated mobile robot."""

from .border import (BorderKind, PartitionResult, PolygonalChain, build_posterior,
                     classify_chain, extend_open_chain, extract_chain,
                     integrate_border, partition_map, rasterize_chain)
from .camera import CameraIntrinsics, CameraMount, CameraPose, ground_depth
from .detect import (BlobCandidate, DetectionParams, candidate_mask,
                     detect_laser_point, extract_blobs, filter_blobs,
                     select_brightest)
from .evaluate import (LinearFit, ScenarioReport, border_length, fit_time_length,
                       jaccard, run_scenario, virtual_area_cells)
from .fsm import (FeedbackEvent, TeachingSession, TeachingState, TransitionEvent,
                  finalize_session, handle_event)
from .grid import (FREE, OCCUPIED, UNKNOWN, GridOrigin, OccupancyGrid,
                   cell_to_world, load_map, make_grid, save_map, world_to_cell)
from .planner import PlannedPath, path_intersects, plan_path
from .projection import (CameraPoint3D, camera_to_world, forward_project,
                         inverse_project)
from .robot import (ControllerParams, KinematicLimits, PoseHistory, RobotPose,
                    VelocityCommand, follow_command, rotate_command, step)
from .scene import (Distractor, FloorTexture, LaserSpot, RenderedFrame, SceneSpec,
                    WallBox, render_frame)

__version__ = "0.1.0"
