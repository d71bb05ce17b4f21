from .config import TrainConfig, TrainReport, ABLATIONS
from .exporter import save, export_selection
from .optim import AdamState, adam_step, Adam
from .running import loss_forward, train, grid_search, final_selection, selected_graph

TrainConfig = TrainConfig
TrainReport = TrainReport
ABLATIONS = ABLATIONS
save = save
export_selection = export_selection
AdamState = AdamState
adam_step = adam_step
Adam = Adam
loss_forward = loss_forward
train = train
grid_search = grid_search
final_selection = final_selection
selected_graph = selected_graph
