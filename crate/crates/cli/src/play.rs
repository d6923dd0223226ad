//! Interactive play against a machine.

use std::io::{BufRead, Write};

use anyhow::Result;

use intgame::game_core::{
    candidate_moves, is_legal, parse_move, transcript, winner, LabMove, MoveBounds, Player, Run, G,
};
use intgame::machines::BoxStrategy;

enum Input {
    Move(LabMove),
    Pass,
    Quit,
}

/// Plays `human` against `machine` on `g`, reading commands from `input`.
/// Bottom moves first; a Bottom pass gives Top one turn; two passes in a row end the play.
pub fn repl(
    g: &G,
    mut machine: BoxStrategy,
    human: Player,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Player> {
    writeln!(out, "you play {human}; commands: a move such as 1.2, pass, moves, run, quit")?;
    let mut run: Run = Vec::new();
    let mut bottom_passed = false;
    let verdict = loop {
        let mover = if bottom_passed { Player::Top } else { Player::Bottom };
        let action = if mover == human {
            ask(g, &run, human, input, out)?
        } else {
            match machine.step() {
                Some(mv) => {
                    let lm = LabMove::new(mover, mv);
                    if !is_legal(g, &run, &lm) {
                        writeln!(out, "machine made an illegal move {lm}")?;
                        break human;
                    }
                    writeln!(out, "machine: {}", lm.mv)?;
                    Input::Move(lm)
                }
                None => {
                    writeln!(out, "machine passes")?;
                    Input::Pass
                }
            }
        };
        match action {
            Input::Quit => break winner(g, &run)?,
            Input::Pass if mover == Player::Top => break winner(g, &run)?,
            Input::Pass => bottom_passed = true,
            Input::Move(lm) => {
                if mover == human {
                    machine.observe(&lm.mv);
                }
                run.push(lm);
                bottom_passed = false;
            }
        }
    };
    writeln!(out, "run:\n{}", transcript(&run).trim_end())?;
    writeln!(out, "verdict: {verdict}")?;
    Ok(verdict)
}

fn ask(g: &G, run: &Run, human: Player, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Input> {
    loop {
        write!(out, "{}> ", human.tag())?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Ok(Input::Quit);
        }
        match line.trim() {
            "" => continue,
            "quit" => return Ok(Input::Quit),
            "pass" => return Ok(Input::Pass),
            "run" => writeln!(out, "{}", transcript(run).trim_end())?,
            "moves" => writeln!(out, "{}", legal_moves(g, run, human))?,
            text => match parse_move(g, run, text) {
                Ok(mv) if is_legal(g, run, &LabMove::new(human, mv.clone())) => {
                    return Ok(Input::Move(LabMove::new(human, mv)));
                }
                _ => writeln!(out, "illegal move {text}; legal moves: {}", legal_moves(g, run, human))?,
            },
        }
    }
}

fn legal_moves(g: &G, run: &Run, who: Player) -> String {
    let ms = candidate_moves(g, run, who, &MoveBounds::default());
    if ms.is_empty() {
        return "none".into();
    }
    ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
}
