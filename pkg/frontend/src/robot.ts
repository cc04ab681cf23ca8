// Ghost robot state. The displayed pose and joints only ever come from
// service responses, and only from responses with ik_ok; a failed IK drag
// leaves the ghost exactly where it was and raises a warning flag.

import type { Pose, PoseUpdateResponse } from "./api";

export class GhostRobot {
  pose: Pose | null = null;
  joints: number[] | null = null;
  warning: string | null = null;

  apply(res: PoseUpdateResponse): boolean {
    if (!res.ik_ok) {
      this.warning = "target unreachable";
      return false;
    }
    this.warning = null;
    this.pose = res.pose;
    this.joints = res.joints;
    return true;
  }

  clearWarning(): void {
    this.warning = null;
  }
}
