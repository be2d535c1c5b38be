import { ApiClient } from "./api.js";
import { loadState, Store } from "./state.js";
import { renderWizard } from "./wizard.js";

const root = document.getElementById("app");
if (root) {
  // restore any in-progress wizard (including a running job) on reload
  const store = new Store(loadState());
  renderWizard(root, store, new ApiClient());
}
