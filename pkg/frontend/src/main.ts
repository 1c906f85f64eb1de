/** Entry point: mount the studio into #app against the same-origin API. */

import { StudioApi } from "./api.js";
import { createStudio } from "./ui.js";

const mount = document.getElementById("app");
if (mount) {
  createStudio(mount, new StudioApi(""));
}
